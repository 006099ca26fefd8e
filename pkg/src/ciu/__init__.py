"""Contextual importance and utility explanations for black-box models."""
