"""Allow running B-GRPO as ``python -m bgrpo``."""

from bgrpo.cli import main

if __name__ == "__main__":
    main()
