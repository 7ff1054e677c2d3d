"""Near-field multi-user secure transmission: dynamic AN-aided hybrid
precoding, closed-form secrecy analysis, and link-level experiments."""

__version__ = "0.1.0"
