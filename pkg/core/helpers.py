# core/helpers.py
"""
Helper utilities for parsing text inputs, exact rationals, and batching.
"""
import re
from fractions import Fraction
from itertools import islice
from multiprocessing import cpu_count
from typing import Any, Dict, Iterable, Iterator, List, Tuple, Union

from core.errors import RankingParseError

_RATIONAL = re.compile(r'^[+-]?\d+(/\d+)?$')


def normalize_text(text: str) -> str:
    """
    Remove all whitespace from a token.

    Args:
        text: Input text

    Returns:
        Text with whitespace stripped out
    """
    return re.sub(r'\s+', '', text)


def iter_content_lines(text: str) -> Iterator[Tuple[int, str]]:
    """
    Yield (line_number, content) for non-blank lines with '#' comments removed.

    Args:
        text: Multi-line file content

    Returns:
        Iterator of 1-based line numbers and stripped content
    """
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split('#', 1)[0].strip()
        if content:
            yield number, content


def parse_rational(text: str, line: int = None, allow_negative: bool = True) -> Fraction:
    """
    Parse an integer or 'a/b' rational exactly.

    Args:
        text: Token such as '3', '-1', '3/4'
        line: Line number for error messages
        allow_negative: Reject negative values when False

    Returns:
        Exact Fraction
    """
    token = normalize_text(text)
    if not _RATIONAL.match(token):
        raise RankingParseError("expected an integer or a/b rational", line=line, text=text)
    try:
        value = Fraction(token)
    except ZeroDivisionError:
        raise RankingParseError("zero denominator", line=line, text=text)
    if value < 0 and not allow_negative:
        raise RankingParseError("negative value not allowed", line=line, text=text)
    return value


def parse_bool(text: str) -> bool:
    """Parse yes/no style flags."""
    lowered = text.strip().lower()
    if lowered in ("yes", "true", "1", "on"):
        return True
    if lowered in ("no", "false", "0", "off", "-"):
        return False
    raise RankingParseError("expected yes/no", text=text)


def parse_workers(value: Union[int, str]) -> int:
    """Worker count: an integer or 'auto' for every core."""
    if isinstance(value, str) and value.strip().lower() == "auto":
        return cpu_count()
    return int(value)


def parse_key_values(tokens: Iterable[str], line: int = None) -> Dict[str, str]:
    """
    Parse 'key=value' tokens into a dictionary.

    Args:
        tokens: Tokens such as ['q=3/4', 'depth=2']
        line: Line number for error messages

    Returns:
        Mapping of key to raw value text
    """
    params = {}
    for token in tokens:
        if '=' not in token:
            raise RankingParseError("expected key=value", line=line, text=token)
        key, value = token.split('=', 1)
        key = key.strip().lower()
        if key in params:
            raise RankingParseError(f"duplicate parameter {key!r}", line=line, text=token)
        params[key] = value.strip()
    return params


def flatten_dict(nested_dict: Dict[str, Any], parent_key: str = '', sep: str = '.') -> Dict[str, Any]:
    """
    Flatten nested dictionary.

    Args:
        nested_dict: Nested dictionary
        parent_key: Parent key prefix
        sep: Separator for nested keys

    Returns:
        Flattened dictionary
    """
    items = []

    for key, value in nested_dict.items():
        new_key = f"{parent_key}{sep}{key}" if parent_key else key

        if isinstance(value, dict):
            items.extend(flatten_dict(value, new_key, sep=sep).items())
        else:
            items.append((new_key, value))

    return dict(items)


def compare_dicts(dict1: Dict[str, Any], dict2: Dict[str, Any]) -> Dict[str, Any]:
    """
    Compare two dictionaries and return differences.

    Args:
        dict1: First dictionary
        dict2: Second dictionary

    Returns:
        Dictionary with added, removed, and modified keys
    """
    flat1 = flatten_dict(dict1)
    flat2 = flatten_dict(dict2)

    all_keys = set(flat1.keys()) | set(flat2.keys())

    added = {k: flat2[k] for k in flat2.keys() - flat1.keys()}
    removed = {k: flat1[k] for k in flat1.keys() - flat2.keys()}
    modified = {k: {'old': flat1[k], 'new': flat2[k]}
                for k in all_keys if k in flat1 and k in flat2 and flat1[k] != flat2[k]}

    return {
        'added': added,
        'removed': removed,
        'modified': modified,
        'unchanged_count': len(all_keys) - len(added) - len(removed) - len(modified)
    }


def batch_list(items: Iterable[Any], batch_size: int) -> Iterator[List[Any]]:
    """
    Split an iterable into batches lazily.

    Args:
        items: Iterable of items
        batch_size: Size of each batch

    Returns:
        Iterator of batches (the last one may be shorter)
    """
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    iterator = iter(items)
    while True:
        batch = list(islice(iterator, batch_size))
        if not batch:
            return
        yield batch
