"""Allow ``python -m helios``."""

from .cli import main

raise SystemExit(main())
