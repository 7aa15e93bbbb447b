"""Line-oriented ``key = value`` text files used for run inputs."""

from .errors import SpecFileError


def read_key_values(path):
    """Parse a ``key = value`` file into a dict; ``#`` starts a comment.

    Keys are lowercased and whitespace-stripped, values are kept as raw
    strings for the caller to interpret.  Later lines overwrite earlier
    ones with the same key.
    """
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecFileError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            entries[key.strip().lower()] = value.strip()
    return entries
