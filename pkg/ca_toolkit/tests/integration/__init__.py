"""End-to-end tests running ca_cli.py in a subprocess."""
