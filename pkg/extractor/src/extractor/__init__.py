"""Dataset extraction: turns Java/Python sources into the summarizer's
JSONL dataset format with pre-order AST interchange records."""

__version__ = "0.1.0"
