"""Bundled fixture data: golden transcripts, campaign ledgers, descriptor
regression rows, and small CIF inputs."""

import os

_ROOT = os.path.dirname(os.path.abspath(__file__))


def path(*parts):
    """Absolute path of a bundled data file."""
    return os.path.join(_ROOT, *parts)
