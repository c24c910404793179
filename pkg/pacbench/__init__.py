"""PAC code construction, Fano sequential decoding and channel bounds."""

__version__ = "0.1.0"
