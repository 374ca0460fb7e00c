"""Attention networks from social-media event logs: retweet networks, attentional
degrees, disparity-filter backbones and summary reports."""

__version__ = "0.1.0"
