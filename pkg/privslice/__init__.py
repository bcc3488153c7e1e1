"""Static privacy slicing of µIR apps."""

__version__ = "0.1.0"
