"""Registration-plate grammar: generation, validation, label round-trip.

A plate has three blocks drawn from fixed alphabets:

* region code: 1-3 uppercase letters A-Z
* middle letters: 1-2 uppercase letters A-Z
* digits: 1-4 characters 0-9

and at most 9 characters in total across the blocks.  The canonical label
is ``region + "-" + middle + digits`` with no blank characters; the dash is
part of every label and parsing is unambiguous because letters and digits
cannot mix inside the second segment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import PlateGrammarError
from .prng import SplitMix64

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
DIGITS = "0123456789"
MAX_TOTAL_CHARS = 9

# Every legal (region, middle, digits) length combination, in a fixed order
# so that shape selection by index is reproducible.
SHAPES: tuple[tuple[int, int, int], ...] = tuple(
    (r, m, d)
    for r in (1, 2, 3)
    for m in (1, 2)
    for d in (1, 2, 3, 4)
    if r + m + d <= MAX_TOTAL_CHARS
)

_LABEL_RE = re.compile(r"^([A-Z]{1,3})-([A-Z]{1,2})([0-9]{1,4})$")


def validate_blocks(region: str, middle: str, digits: str) -> list[str]:
    """Return a list of grammar violations; empty means valid."""
    problems: list[str] = []
    if not (1 <= len(region) <= 3):
        problems.append(f"region length {len(region)} outside 1..3")
    if not (1 <= len(middle) <= 2):
        problems.append(f"middle length {len(middle)} outside 1..2")
    if not (1 <= len(digits) <= 4):
        problems.append(f"digits length {len(digits)} outside 1..4")
    total = len(region) + len(middle) + len(digits)
    if total > MAX_TOTAL_CHARS:
        problems.append(f"total length {total} exceeds {MAX_TOTAL_CHARS}")
    for name, block, alphabet in (
        ("region", region, LETTERS),
        ("middle", middle, LETTERS),
        ("digits", digits, DIGITS),
    ):
        bad = sorted(set(block) - set(alphabet))
        if bad:
            problems.append(f"{name} contains invalid characters {bad!r}")
    return problems


@dataclass(frozen=True)
class PlateString:
    """One plate registration.  Construction enforces the grammar."""

    region: str
    middle: str
    digits: str

    def __post_init__(self) -> None:
        problems = validate_blocks(self.region, self.middle, self.digits)
        if problems:
            raise PlateGrammarError("; ".join(problems))

    @property
    def label(self) -> str:
        return f"{self.region}-{self.middle}{self.digits}"

    @property
    def chars(self) -> str:
        """Characters painted on the plate, without the dash."""
        return self.region + self.middle + self.digits


def format_label(plate: PlateString) -> str:
    return plate.label


def parse_label(label: str) -> PlateString:
    """Inverse of format_label.  Raises PlateGrammarError on any mismatch."""
    match = _LABEL_RE.match(label)
    if match is None:
        raise PlateGrammarError(f"label {label!r} does not match the plate grammar")
    return PlateString(*match.groups())


def generate_plate(rng: SplitMix64) -> PlateString:
    """Draw a uniformly shaped, uniformly lettered plate.

    Draw order (pinned by tests): one shape index over SHAPES, then each
    character left to right (region, middle, digits).
    """
    region_len, middle_len, digit_len = SHAPES[rng.next_below(len(SHAPES))]
    region = "".join(LETTERS[rng.next_below(26)] for _ in range(region_len))
    middle = "".join(LETTERS[rng.next_below(26)] for _ in range(middle_len))
    digits = "".join(DIGITS[rng.next_below(10)] for _ in range(digit_len))
    return PlateString(region, middle, digits)
