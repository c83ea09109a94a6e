"""Focus-area prompting for LLM community detection on social media."""

__version__ = "0.1.0"
