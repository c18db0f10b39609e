"""PDN-impedance tamper verification simulator for multi-chiplet packages."""

__version__ = "0.1.0"
