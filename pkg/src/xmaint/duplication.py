"""Token-based clone detection and dual duplication ratios.

A clone block pairs two occurrences of the same normalized token sequence.
Blocks are maximal: extending either end by one token would break the
element-wise equality or, for two occurrences inside one file, make them
overlap. Self-overlapping repeats are therefore capped at their period,
which splits a periodic run into non-overlapping blocks greedily from the
left.

Detection hashes every window of ``min_tokens`` tokens (polynomial rolling
hash), verifies candidate window pairs exactly, then merges window matches
along diagonals into maximal blocks. Both a token ratio and a line ratio
are reported so the lines-vs-tokens verbosity bias stays visible.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations

from .lexing import COMMENT, IDENTIFIER, LineClassification, Token

EXACT = "exact"
IDENTIFIER_BLIND = "identifier-blind"

_MOD = (1 << 61) - 1
_BASE = 1_000_003

_ID_PLACEHOLDER = "\x00id"


@dataclass(frozen=True)
class NormToken:
    kind: str
    text: str
    index: int  # position in the original token sequence
    line: int
    end_line: int

    @property
    def key(self) -> tuple[str, str]:
        return (self.kind, self.text)


@dataclass(frozen=True)
class CloneBlock:
    file_a: str
    start_token_a: int  # original token index of the first occurrence
    start_line_a: int
    file_b: str
    start_token_b: int
    start_line_b: int
    length_tokens: int
    length_lines_a: int
    length_lines_b: int
    norm_start_a: int  # positions in the normalized streams (internal bookkeeping)
    norm_start_b: int


@dataclass(frozen=True)
class DuplicationReport:
    blocks: tuple[CloneBlock, ...]
    duplicated_token_ratio: float
    duplicated_line_ratio: float
    min_tokens: int
    normalization_mode: str
    duplicated_tokens: int
    total_tokens: int
    duplicated_lines: int
    total_code_lines: int


def normalize_tokens(
    tokens: list[Token], mode: str = EXACT, case_sensitive: bool = True
) -> list[NormToken]:
    """Drop comments; in identifier-blind mode all identifiers compare equal."""
    if mode not in (EXACT, IDENTIFIER_BLIND):
        raise ValueError(f"unknown normalization mode '{mode}'")
    out = []
    for index, tok in enumerate(tokens):
        if tok.kind == COMMENT:
            continue
        text = tok.text if case_sensitive else tok.text.upper()
        if mode == IDENTIFIER_BLIND and tok.kind == IDENTIFIER:
            text = _ID_PLACEHOLDER
        out.append(
            NormToken(kind=tok.kind, text=text, index=index, line=tok.line, end_line=tok.end_line)
        )
    return out


def _intern(sequences: dict[str, list[NormToken]]) -> dict[str, list[int]]:
    table: dict[tuple[str, str], int] = {}
    ids = {}
    for name, seq in sequences.items():
        row = []
        for tok in seq:
            key = tok.key
            if key not in table:
                table[key] = len(table)
            row.append(table[key])
        ids[name] = row
    return ids


def _window_hashes(row: list[int], width: int) -> list[int]:
    """Rolling polynomial hash of every width-sized window."""
    n = len(row)
    if n < width:
        return []
    power = pow(_BASE, width - 1, _MOD)
    h = 0
    for value in row[:width]:
        h = (h * _BASE + value + 1) % _MOD
    hashes = [h]
    for i in range(width, n):
        h = ((h - (row[i - width] + 1) * power) * _BASE + row[i] + 1) % _MOD
        hashes.append(h)
    return hashes


def find_clone_blocks(
    sequences: dict[str, list[NormToken]], min_tokens: int
) -> list[CloneBlock]:
    """All maximal clone blocks of at least ``min_tokens`` normalized tokens.

    Output is sorted by (file_a, start_a, file_b, start_b); the pair of
    occurrences is oriented so the first one comes earlier in that order.
    """
    if min_tokens < 3:
        raise ValueError("min_tokens must be >= 3")
    files = sorted(sequences)
    ids = _intern(sequences)

    buckets: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for f_idx, name in enumerate(files):
        for pos, h in enumerate(_window_hashes(ids[name], min_tokens)):
            buckets[h].append((f_idx, pos))

    # verified window-start pairs, grouped by diagonal
    diagonals: dict[tuple[int, int, int], list[int]] = defaultdict(list)
    for positions in buckets.values():
        if len(positions) < 2:
            continue
        for (fa, pa), (fb, pb) in combinations(positions, 2):
            ra, rb = ids[files[fa]], ids[files[fb]]
            if ra[pa : pa + min_tokens] != rb[pb : pb + min_tokens]:
                continue  # hash collision
            diagonals[(fa, fb, pb - pa)].append(pa)

    blocks: list[CloneBlock] = []
    for (fa, fb, delta), starts in diagonals.items():
        starts = sorted(set(starts))
        run_start = starts[0]
        previous = starts[0]
        runs = []
        for s in starts[1:]:
            if s == previous + 1:
                previous = s
                continue
            runs.append((run_start, previous))
            run_start = previous = s
        runs.append((run_start, previous))
        for s, e in runs:
            match_len = e - s + min_tokens
            if fa != fb:
                blocks.append(_make_block(sequences, files, fa, s, fb, s + delta, match_len))
            elif match_len <= delta:
                blocks.append(_make_block(sequences, files, fa, s, fb, s + delta, match_len))
            elif delta >= min_tokens:
                # self-overlapping repeat: greedy split at the period
                for t in range(0, match_len - delta + 1):
                    blocks.append(
                        _make_block(sequences, files, fa, s + t, fb, s + t + delta, delta)
                    )

    blocks.sort(key=lambda b: (b.file_a, b.norm_start_a, b.file_b, b.norm_start_b))
    return blocks


def _occurrence_lines(seq: list[NormToken], start: int, length: int) -> tuple[int, int, int]:
    toks = seq[start : start + length]
    first = toks[0].line
    last = max(t.end_line for t in toks)
    return first, last, last - first + 1


def _make_block(sequences, files, fa, pa, fb, pb, length) -> CloneBlock:
    name_a, name_b = files[fa], files[fb]
    seq_a, seq_b = sequences[name_a], sequences[name_b]
    line_a, _, span_a = _occurrence_lines(seq_a, pa, length)
    line_b, _, span_b = _occurrence_lines(seq_b, pb, length)
    return CloneBlock(
        file_a=name_a,
        start_token_a=seq_a[pa].index,
        start_line_a=line_a,
        file_b=name_b,
        start_token_b=seq_b[pb].index,
        start_line_b=line_b,
        length_tokens=length,
        length_lines_a=span_a,
        length_lines_b=span_b,
        norm_start_a=pa,
        norm_start_b=pb,
    )


def duplication_ratios(
    blocks: list[CloneBlock],
    sequences: dict[str, list[NormToken]],
    total_code_lines: int,
) -> tuple[float, float, int, int, int]:
    """Coverage-based ratios: every token/line position counts once no matter
    how many blocks cover it. Returns (token_ratio, line_ratio, dup_tokens,
    dup_lines, total_tokens)."""
    covered_tokens: set[tuple[str, int]] = set()
    covered_lines: set[tuple[str, int]] = set()
    for block in blocks:
        for name, start in ((block.file_a, block.norm_start_a), (block.file_b, block.norm_start_b)):
            seq = sequences[name]
            for pos in range(start, start + block.length_tokens):
                covered_tokens.add((name, pos))
                tok = seq[pos]
                for line in range(tok.line, tok.end_line + 1):
                    covered_lines.add((name, line))
    total_tokens = sum(len(seq) for seq in sequences.values())
    token_ratio = len(covered_tokens) / total_tokens if total_tokens else 0.0
    line_ratio = len(covered_lines) / total_code_lines if total_code_lines else 0.0
    return token_ratio, line_ratio, len(covered_tokens), len(covered_lines), total_tokens


def build_report(
    sequences: dict[str, list[NormToken]],
    min_tokens: int,
    mode: str,
    line_classes: dict[str, LineClassification] | None = None,
) -> DuplicationReport:
    blocks = find_clone_blocks(sequences, min_tokens)
    if line_classes is not None:
        total_code_lines = sum(lc.code + lc.mixed for lc in line_classes.values())
    else:
        total_code_lines = sum(
            len({line for t in seq for line in range(t.line, t.end_line + 1)})
            for seq in sequences.values()
        )
    token_ratio, line_ratio, dup_tokens, dup_lines, total_tokens = duplication_ratios(
        blocks, sequences, total_code_lines
    )
    return DuplicationReport(
        blocks=tuple(blocks),
        duplicated_token_ratio=token_ratio,
        duplicated_line_ratio=line_ratio,
        min_tokens=min_tokens,
        normalization_mode=mode,
        duplicated_tokens=dup_tokens,
        total_tokens=total_tokens,
        duplicated_lines=dup_lines,
        total_code_lines=total_code_lines,
    )
