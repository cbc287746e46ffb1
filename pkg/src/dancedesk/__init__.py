"""dancedesk: desk-scale text-conditioned dance generation and editing."""

__version__ = "0.1.0"
