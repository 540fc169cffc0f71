"""Email corpus ingestion: header parsing, alias resolution, weighted accumulation.

The pipeline turns raw messages into a directed weight matrix. Each To
recipient of a message adds 1.0 to the sender->recipient cell; each CC
recipient adds 1/sqrt(1 + c), where c counts every address listed in that
message's CC field, whether or not it resolves to a roster member. Only the
From/To/CC headers are ever read; bodies are ignored.
"""
from __future__ import annotations

import csv
import hashlib
import math
import os
from collections import Counter
from dataclasses import dataclass, fields
from email.utils import getaddresses
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, EmailParseError, MatrixFormatError
from .graph import NodeRoster, WeightedDigraph

ALIAS_HEADER = ("pattern", "canonical_id")
EXTRACT_HEADER = ("from", "to", "cc")
DEFAULT_DOMAIN = "enron.com"


@dataclass
class IngestDiagnostics:
    """Counters for everything the pipeline dropped or skipped."""

    messages_parsed: int = 0
    parse_failures: int = 0
    malformed_header_lines: int = 0
    duplicates_removed: int = 0
    dropped_senders: int = 0
    dropped_recipients: int = 0

    def lines(self) -> list[str]:
        return [f"{f.name} {getattr(self, f.name)}" for f in fields(self)]

    def summary(self) -> str:
        return "\n".join(self.lines())

    def write(self, path) -> None:
        Path(path).write_text(self.summary() + "\n", encoding="utf-8")


@dataclass(frozen=True)
class EmailRecord:
    """Sender and recipients of one message; addresses lowercase and trimmed.

    ``date`` and ``message_id`` keep the raw header values so that mailbox
    copies of a single message (sender folder vs recipient folder) can be
    recognised; they play no part in the weighting itself.
    """

    from_addr: str
    to_addrs: tuple[str, ...]
    cc_addrs: tuple[str, ...]
    source_path: str = ""
    date: str = ""
    message_id: str = ""


@dataclass(frozen=True)
class AliasTable:
    """Exact-match address rules mapping spellings onto canonical ids.

    A pattern containing ``@`` matches the full address, otherwise the local
    part. Addresses outside ``domain_filter`` never resolve.
    """

    rules: dict[str, str]
    domain_filter: str = DEFAULT_DOMAIN

    def canonical_ids(self) -> set[str]:
        return set(self.rules.values())


def _header_block(raw_text: str, diagnostics: IngestDiagnostics | None) -> list[list[str]]:
    """Logical header lines with continuations unfolded; stops at the first blank line."""
    headers: list[list[str]] = []
    for line in raw_text.splitlines():
        line = line.rstrip("\r")
        if not line.strip():
            break  # body starts here and is never read
        if line[0] in " \t":
            if headers:
                headers[-1][1] += " " + line.strip()
            elif diagnostics is not None:
                diagnostics.malformed_header_lines += 1
            continue
        name, sep, value = line.partition(":")
        if not sep or not name.strip():
            if diagnostics is not None:
                diagnostics.malformed_header_lines += 1
            continue
        headers.append([name.strip().lower(), value.strip()])
    return headers


def _addresses(values: list[str]) -> tuple[str, ...]:
    out = []
    for _, addr in getaddresses(values):
        addr = addr.strip().lower()
        if addr:
            out.append(addr)
    return tuple(out)


def parse_email(
    raw_text: str,
    source_path: str = "",
    diagnostics: IngestDiagnostics | None = None,
) -> EmailRecord:
    """Extract From/To/CC (plus Date and Message-ID) from a raw message.

    Malformed header lines are skipped and counted rather than aborting the
    message. Raises :class:`EmailParseError` when no usable From address is
    present.
    """
    headers = _header_block(raw_text, diagnostics)
    from_values = [v for n, v in headers if n == "from"]
    to_values = [v for n, v in headers if n == "to"]
    cc_values = [v for n, v in headers if n == "cc"]
    date = next((v for n, v in headers if n == "date"), "")
    message_id = next((v for n, v in headers if n == "message-id"), "")

    where = source_path or "<string>"
    if not from_values:
        raise EmailParseError(f"{where}: missing From header", source_path)
    senders = _addresses(from_values[:1])
    if not senders:
        raise EmailParseError(f"{where}: no parseable address in From header", source_path)
    return EmailRecord(
        from_addr=senders[0],
        to_addrs=_addresses(to_values),
        cc_addrs=_addresses(cc_values),
        source_path=source_path,
        date=date,
        message_id=message_id,
    )


def resolve(addr: str, table: AliasTable) -> str | None:
    """Canonical id for an address, or None for foreign domains and unknown spellings."""
    local, sep, domain = addr.rpartition("@")
    if not sep or domain != table.domain_filter:
        return None
    hit = table.rules.get(addr)
    if hit is None:
        hit = table.rules.get(local)
    return hit


def default_alias_rules(roster: NodeRoster) -> dict[str, str]:
    """Generate the local-part spellings commonly used for "First [Middle] Last" names.

    Variants: first.last, flast, first_last, last.first, first.middle.last,
    and 'last. Patterns claimed by more than one person are dropped as
    ambiguous.
    """
    claims: dict[str, set[str]] = {}
    for entry in roster.entries:
        parts = [p.strip(".") for p in entry.display_name.lower().split() if p.strip(".")]
        if not parts:
            continue
        variants: set[str] = set()
        if len(parts) == 1:
            variants.add(parts[0])
        else:
            first, last = parts[0], parts[-1]
            middles = parts[1:-1]
            variants.update(
                (
                    f"{first}.{last}",
                    f"{first[0]}{last}",
                    f"{first}_{last}",
                    f"{last}.{first}",
                    f"'{last}",
                )
            )
            if middles:
                variants.add(".".join([first, *middles, last]))
        for v in variants:
            claims.setdefault(v, set()).add(entry.canonical_id)
    return {p: next(iter(owners)) for p, owners in sorted(claims.items()) if len(owners) == 1}


def save_alias_csv(table: AliasTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ALIAS_HEADER)
        for pattern in sorted(table.rules):
            writer.writerow((pattern, table.rules[pattern]))


def load_alias_csv(path, domain_filter: str = DEFAULT_DOMAIN) -> AliasTable:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as err:
        raise MatrixFormatError(f"cannot read alias file {path}: {err}") from err
    if not rows:
        raise MatrixFormatError(f"{path}: alias file is empty")
    header = tuple(c.strip().lower() for c in rows[0])
    if header != ALIAS_HEADER:
        raise MatrixFormatError(
            f"{path}: expected header {','.join(ALIAS_HEADER)}, got {','.join(rows[0])}"
        )
    rules: dict[str, str] = {}
    for r, row in enumerate(rows[1:]):
        if len(row) != 2:
            raise MatrixFormatError(f"{path} row {r + 2}: expected 2 cells, got {len(row)}")
        pattern, canonical = row[0].strip().lower(), row[1].strip()
        if not pattern or not canonical:
            raise MatrixFormatError(f"{path} row {r + 2}: empty pattern or canonical_id")
        if pattern in rules and rules[pattern] != canonical:
            raise ConfigError(
                f"{path} row {r + 2}: pattern {pattern!r} maps to both "
                f"{rules[pattern]!r} and {canonical!r}"
            )
        rules[pattern] = canonical
    return AliasTable(rules, domain_filter)


def validate_alias_table(table: AliasTable, roster: NodeRoster) -> None:
    unknown = sorted(table.canonical_ids() - set(roster.ids))
    if unknown:
        shown = ", ".join(unknown[:5])
        more = "" if len(unknown) <= 5 else f" (+{len(unknown) - 5} more)"
        raise ConfigError(f"alias table references ids missing from the roster: {shown}{more}")


def cc_discount(n_cc: int) -> float:
    """Weight contributed by one cc edge on a message carrying ``n_cc`` cc addresses."""
    return 1.0 / math.sqrt(1.0 + n_cc)


def accumulate(
    records: Iterable[EmailRecord],
    table: AliasTable,
    roster: NodeRoster,
    diagnostics: IngestDiagnostics | None = None,
) -> WeightedDigraph:
    """Sum per-message contributions into the directed weight matrix.

    Counts are aggregated per cc-group size before the weighted combination,
    so the result is independent of record order, bit for bit. Unresolvable
    senders drop the whole message; unresolvable recipients contribute
    nothing. Self-addressed mail is kept (it vanishes later in the undirected
    fold).
    """
    validate_alias_table(table, roster)
    n = len(roster)
    pos = roster.index
    direct: Counter = Counter()
    ccs: Counter = Counter()  # keyed (i, j, cc-field size)
    for rec in records:
        sender = resolve(rec.from_addr, table)
        if sender is None:
            if diagnostics is not None:
                diagnostics.dropped_senders += 1
            continue
        i = pos[sender]
        for addr in rec.to_addrs:
            target = resolve(addr, table)
            if target is None:
                if diagnostics is not None:
                    diagnostics.dropped_recipients += 1
                continue
            direct[(i, pos[target])] += 1
        n_cc = len(rec.cc_addrs)
        for addr in rec.cc_addrs:
            target = resolve(addr, table)
            if target is None:
                if diagnostics is not None:
                    diagnostics.dropped_recipients += 1
                continue
            ccs[(i, pos[target], n_cc)] += 1

    m = np.zeros((n, n))
    for (i, j), count in sorted(direct.items()):
        m[i, j] += count
    for (i, j, n_cc), count in sorted(ccs.items()):
        m[i, j] += count * cc_discount(n_cc)
    return WeightedDigraph(roster, m)


def duplicate_key(rec: EmailRecord) -> str | None:
    """Digest identifying mailbox copies of one message.

    Returns None when the message has neither Date nor Message-ID: repeated
    sends are then indistinguishable from copies and must all be counted.
    """
    if not rec.date and not rec.message_id:
        return None
    blob = "\x1f".join(
        (rec.from_addr, ",".join(rec.to_addrs), ",".join(rec.cc_addrs), rec.date, rec.message_id)
    )
    return hashlib.sha1(blob.encode("utf-8")).hexdigest()


def drop_duplicates(
    records: Iterable[EmailRecord],
    diagnostics: IngestDiagnostics | None = None,
) -> Iterator[EmailRecord]:
    seen: set[str] = set()
    for rec in records:
        key = duplicate_key(rec)
        if key is not None:
            if key in seen:
                if diagnostics is not None:
                    diagnostics.duplicates_removed += 1
                continue
            seen.add(key)
        yield rec


def iter_directory(
    root,
    diagnostics: IngestDiagnostics | None = None,
) -> Iterator[EmailRecord]:
    """Parse every regular file under ``root`` in sorted order, skipping unparseable ones."""
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for fname in sorted(filenames):
            path = os.path.join(dirpath, fname)
            try:
                text = Path(path).read_text(encoding="utf-8", errors="replace")
            except OSError:
                if diagnostics is not None:
                    diagnostics.parse_failures += 1
                continue
            try:
                rec = parse_email(text, path, diagnostics)
            except EmailParseError:
                if diagnostics is not None:
                    diagnostics.parse_failures += 1
                continue
            if diagnostics is not None:
                diagnostics.messages_parsed += 1
            yield rec


def iter_extract_csv(
    path,
    diagnostics: IngestDiagnostics | None = None,
) -> Iterator[EmailRecord]:
    """Yield records from a ``from,to,cc`` extraction; recipients are ';'-separated.

    Extraction rows carry no Date or Message-ID, so duplicate removal never
    applies to them.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as err:
        raise MatrixFormatError(f"cannot read extraction file {path}: {err}") from err
    with fh:
        reader = csv.DictReader(fh)
        cols = tuple(c.strip().lower() for c in reader.fieldnames or ())
        missing = [c for c in EXTRACT_HEADER if c not in cols]
        if missing:
            raise MatrixFormatError(
                f"{path}: extraction file is missing column(s) {', '.join(missing)}"
            )
        for row_no, row in enumerate(reader, start=2):
            low = {(k or "").strip().lower(): (v or "") for k, v in row.items()}
            sender = low.get("from", "").strip().lower()
            if not sender:
                if diagnostics is not None:
                    diagnostics.parse_failures += 1
                continue
            if diagnostics is not None:
                diagnostics.messages_parsed += 1
            yield EmailRecord(
                from_addr=sender,
                to_addrs=_split_cell(low.get("to", "")),
                cc_addrs=_split_cell(low.get("cc", "")),
                source_path=f"{path}#row{row_no}",
            )


def _split_cell(cell: str) -> tuple[str, ...]:
    return tuple(a.strip().lower() for a in cell.split(";") if a.strip())


def ingest_corpus(
    input_path,
    table: AliasTable,
    roster: NodeRoster,
    *,
    dedupe: bool = True,
    diagnostics: IngestDiagnostics | None = None,
) -> WeightedDigraph:
    """Full pipeline: message source (directory tree or extraction CSV) to weight matrix."""
    p = Path(input_path)
    if p.is_dir():
        records: Iterable[EmailRecord] = iter_directory(p, diagnostics)
    else:
        records = iter_extract_csv(p, diagnostics)
    if dedupe:
        records = drop_duplicates(records, diagnostics)
    return accumulate(records, table, roster, diagnostics)
