"""Anonymous, location-verified, DoS-resistant spectrum access: primitives,
protocol entities and a discrete-event simulation harness."""

__version__ = "0.1.0"
