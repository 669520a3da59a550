"""Asynchronous replicated FIFO and k-out-of-order queues, simulated and checked."""

__version__ = "0.1.0"
