"""vid2kg: logical knowledge graphs from dependency-parsed video captions."""

__version__ = "0.1.0"
