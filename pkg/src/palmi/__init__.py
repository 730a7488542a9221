"""Tabular pipeline predicting the microbial inactivation achieved by
plasma-activated liquids from twelve experimental predictors."""

__version__ = "0.1.0"
