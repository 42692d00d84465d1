"""Figure rendering for foilflow CLI outputs.

One script per figure family; every script reads the CLI's CSV/JSON files
and never recomputes physics.
"""

__version__ = "1.0.0"
