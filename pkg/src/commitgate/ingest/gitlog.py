"""Parser for the delimited git-log interchange format.

The format is what ``git log`` emits with a pretty format of the seven
fields hash, author name, author email, author date, committer name,
committer email, committer date joined by the ASCII unit separator (0x1F)
and terminated by the record separator (0x1E), followed by ``--name-status``
file lines:

    <hash>\\x1f<an>\\x1f<ae>\\x1f<aI>\\x1f<cn>\\x1f<ce>\\x1f<cI>\\x1e
    M\\tpath/to/file
    A\\tnew/file

Dates must be strict ISO-8601. The commit message is not part of the
format, so parsed records carry an empty message.
"""

from __future__ import annotations

import re
from typing import Sequence

from ..errors import ParseError
from ..months import isoformat_z, parse_iso_utc
from .events import CommitRecord

FIELD_SEP = "\x1f"
RECORD_SEP = "\x1e"

FIELD_NAMES = (
    "hash",
    "author_name",
    "author_email",
    "author_time",
    "committer_name",
    "committer_email",
    "committer_time",
)

_HASH_RE = re.compile(r"^[0-9a-f]{40}$")


def parse_git_log(stream: str, repo: str = "") -> list[CommitRecord]:
    """Parse a delimited git log into commit records, in stream order.

    Malformed records raise :class:`ParseError` carrying the byte offset of
    the record and its index; bad timestamps name the offending field.
    """
    if not stream.strip():
        return []

    chunks = stream.split(RECORD_SEP)
    if len(chunks) < 2:
        raise ParseError("no record separator found", byte_offset=0, record_index=0)

    # chunk 0 is the first header; chunk i>0 holds the file lines of record
    # i-1 followed by the header of record i; the final chunk holds only the
    # trailing file lines.
    headers: list[tuple[str, int]] = []  # (header text, byte offset)
    file_blocks: list[list[str]] = []
    offset = 0
    for i, chunk in enumerate(chunks):
        last = i == len(chunks) - 1
        if i == 0:
            header = chunk
            header_off = offset + len(chunk[: len(chunk) - len(chunk.lstrip("\r\n"))].encode())
            if FIELD_SEP not in header:
                raise ParseError(
                    "record has no field separators",
                    byte_offset=header_off,
                    record_index=0,
                )
            headers.append((header.strip("\r\n"), header_off))
        else:
            lines = chunk.split("\n")
            if last:
                file_blocks.append(lines)
            else:
                header_line = lines[-1]
                body_bytes = len("\n".join(lines[:-1]).encode()) + (1 if len(lines) > 1 else 0)
                header_off = offset + body_bytes
                if FIELD_SEP not in header_line:
                    raise ParseError(
                        "record has no field separators",
                        byte_offset=header_off,
                        record_index=len(headers),
                    )
                file_blocks.append(lines[:-1])
                headers.append((header_line.strip("\r"), header_off))
        offset += len(chunk.encode()) + len(RECORD_SEP)

    records = []
    seen_hashes: set[str] = set()
    for index, (header, header_off) in enumerate(headers):
        fields = header.split(FIELD_SEP)
        if len(fields) != len(FIELD_NAMES):
            missing = FIELD_NAMES[len(fields)] if len(fields) < len(FIELD_NAMES) else None
            detail = f"missing field {missing!r}" if missing else f"{len(fields)} fields"
            raise ParseError(
                f"expected {len(FIELD_NAMES)} fields, got {len(fields)} ({detail})",
                byte_offset=header_off,
                record_index=index,
            )
        values = dict(zip(FIELD_NAMES, fields))
        if not _HASH_RE.match(values["hash"]):
            raise ParseError(
                f"invalid commit hash {values['hash']!r}",
                byte_offset=header_off,
                record_index=index,
            )
        if values["hash"] in seen_hashes:
            raise ParseError(
                f"duplicate commit hash {values['hash']}",
                byte_offset=header_off,
                record_index=index,
            )
        seen_hashes.add(values["hash"])

        times = {}
        for field in ("author_time", "committer_time"):
            try:
                times[field] = parse_iso_utc(values[field], field)
            except ValueError as exc:
                raise ParseError(str(exc), byte_offset=header_off, record_index=index) from exc

        files = _parse_name_status(
            file_blocks[index] if index < len(file_blocks) else [], index
        )
        records.append(
            CommitRecord(
                hash=values["hash"],
                author_name=values["author_name"],
                author_email=values["author_email"],
                author_time=times["author_time"],
                committer_name=values["committer_name"],
                committer_email=values["committer_email"],
                committer_time=times["committer_time"],
                repo=repo,
                files_touched=frozenset(files),
            )
        )
    return records


def _parse_name_status(lines: Sequence[str], record_index: int) -> list[str]:
    paths = []
    for line in lines:
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 2 or not parts[0]:
            raise ParseError(
                f"malformed name-status line {line!r}", record_index=record_index
            )
        # renames/copies list both sides; every named path counts as touched
        paths.extend(p for p in parts[1:] if p)
    return paths


def serialize_git_log(records: Sequence[CommitRecord]) -> str:
    """Render records back to the delimited format (message is not carried)."""
    out = []
    for rec in records:
        header = FIELD_SEP.join(
            (
                rec.hash,
                rec.author_name,
                rec.author_email,
                isoformat_z(rec.author_time),
                rec.committer_name,
                rec.committer_email,
                isoformat_z(rec.committer_time),
            )
        )
        out.append(header + RECORD_SEP + "\n")
        for path in sorted(rec.files_touched):
            out.append(f"M\t{path}\n")
        out.append("\n")
    return "".join(out)
