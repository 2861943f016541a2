"""Entry point for ``python -m`` runs from a source checkout."""

from __future__ import annotations

from pathlib import Path
import sys

if __package__:
    from .src.cli.hyperfrac import main
else:
    root = Path(__file__).resolve().parent
    sys.path.insert(0, str(root))
    from src.cli.hyperfrac import main

if __name__ == "__main__":
    main()
