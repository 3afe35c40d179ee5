"""
Core CLI functionality package

This package contains the core functionality for the CLI system:
- config_loader: Configuration loading, overrides and policy files
- runner: Pipeline execution wrapper
- errors: Custom exception classes and exit codes
- validators: Manifest and pipeline config validation
- reports: JSON/YAML/CSV report writing
"""

__version__ = "1.0.0"
