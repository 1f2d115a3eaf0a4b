"""In-process unit tests for the CLI helpers and manifests."""
