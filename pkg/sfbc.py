#!/usr/bin/env python3
"""
Ranked-ballot stage geometry and favorite-betrayal checker
Entry point for the command-line tools
"""
import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

from core.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
