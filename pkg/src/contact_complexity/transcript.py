"""
Transcript ingestion and the length hypothesis.

Corpora are JSONL files, one transcript object per line::

    {"id": str, "utterances": [{"speaker": "agent"|"customer"|"bot", "text": str}],
     "sic": str?, "resolved": bool?, "transferred": bool?}
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Union

from pydantic import ValidationError

from .errors import CorpusError, ParseError
from .types import Speaker, Transcript

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _describe_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        location = ".".join(str(p) for p in err["loc"])
        if err["type"] == "enum" and location.endswith("speaker"):
            allowed = ", ".join(s.value for s in Speaker)
            parts.append(
                f"unknown speaker {err['input']!r} at {location} (expected one of {allowed})"
            )
        else:
            parts.append(f"{location}: {err['msg']}")
    return "; ".join(parts)


def iter_corpus(path: PathLike) -> Iterator[Transcript]:
    """
    Stream transcripts from a JSONL corpus in file order.

    Blank lines are skipped. Id uniqueness is not checked here; use
    parse_corpus for a validated corpus.

    Raises:
        ParseError: On invalid UTF-8, malformed JSON, schema violations or
            unknown speakers, citing the 1-based line number
    """
    with open(path, "rb") as f:
        for lineno, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise ParseError(
                    f"invalid UTF-8 at byte {e.start}", line=lineno, path=str(path)
                ) from e
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"malformed JSON: {e.msg}", line=lineno, path=str(path)) from e
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", line=lineno, path=str(path))
            try:
                yield Transcript.model_validate(obj)
            except ValidationError as e:
                raise ParseError(
                    _describe_validation_error(e), line=lineno, path=str(path)
                ) from e


def parse_corpus(path: PathLike) -> List[Transcript]:
    """
    Parse a JSONL corpus file.

    Args:
        path: Corpus file

    Returns:
        Transcripts in file order

    Raises:
        ParseError: On a bad line
        CorpusError: When two transcripts share an id
    """
    corpus = list(iter_corpus(path))
    check_unique_ids(corpus)
    logger.info("Parsed %d transcripts from %s", len(corpus), path)
    return corpus


def check_unique_ids(corpus: Iterable[Transcript]) -> None:
    """Raise CorpusError on the first repeated id."""
    seen = set()
    for t in corpus:
        if t.id in seen:
            raise CorpusError(f"duplicate transcript id {t.id!r}")
        seen.add(t.id)


def transcript_to_dict(t: Transcript) -> Dict[str, Any]:
    """JSON-ready dict in schema key order; absent optional fields are omitted."""
    obj: Dict[str, Any] = {
        "id": t.id,
        "utterances": [{"speaker": u.speaker.value, "text": u.text} for u in t.utterances],
    }
    for key in ("sic", "resolved", "transferred"):
        value = getattr(t, key)
        if value is not None:
            obj[key] = value
    return obj


def write_corpus(corpus: Iterable[Transcript], path: PathLike) -> int:
    """
    Write transcripts as UTF-8 JSONL with LF line endings.

    The file is written next to its destination and moved into place, so a
    failed write leaves any existing file untouched.

    Returns:
        Number of transcripts written
    """
    path = Path(path)
    count = 0
    with tempfile.NamedTemporaryFile(
        "w",
        encoding="utf-8",
        newline="\n",
        dir=path.parent,
        prefix=f".{path.name}.",
        delete=False,
    ) as f:
        tmp = Path(f.name)
        try:
            for t in corpus:
                f.write(json.dumps(transcript_to_dict(t), ensure_ascii=False))
                f.write("\n")
                count += 1
        except BaseException:
            f.close()
            tmp.unlink(missing_ok=True)
            raise
    os.replace(tmp, path)
    logger.info("Wrote %d transcripts to %s", count, path)
    return count


def agent_sentence_length(t: Transcript) -> int:
    """Length hypothesis L: the number of agent utterances.

    Customer and bot turns are not counted.
    """
    return sum(1 for u in t.utterances if u.speaker is Speaker.AGENT)
