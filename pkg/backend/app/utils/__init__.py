from .exceptions import *
from .json_utils import (
    canonical_json,
    compact_json,
    load_json_file,
    save_json_file
)
from .file_utils import (
    ensure_directory,
    append_line,
    atomic_write_bytes,
    read_lines,
    truncate_file
)

__all__ = [
    'canonical_json',
    'compact_json',
    'load_json_file',
    'save_json_file',
    'ensure_directory',
    'append_line',
    'atomic_write_bytes',
    'read_lines',
    'truncate_file',
]
