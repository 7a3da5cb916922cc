"""trendmill: single-node retail analytics and per-keyword trend forecasting."""
__version__ = "0.1.0"
