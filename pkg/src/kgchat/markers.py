"""Streaming parser for LLM output with inline entity/relation markers.

The annotated-generation grammar is:

    [surface]($nK)                an entity, K a positive integer
    [surface]($rK, $nI, $nJ)      a relation between entities $nI and $nJ,
                                  spaces after the commas optional

Marker syntax is stripped from the emitted plain text; the surface text
stays in place so the stream reads naturally while spans accumulate.
Malformed syntax never raises: it is passed through as literal text and
reported as a diagnostic. Markers may be split across chunks arbitrarily;
feeding the same bytes in any chunking yields the same result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

ENTITY_PAYLOAD = re.compile(r"^\$n([1-9][0-9]*)$")
RELATION_PAYLOAD = re.compile(r"^\$r([1-9][0-9]*),\s*\$n([1-9][0-9]*),\s*\$n([1-9][0-9]*)$")

_TEXT = "text"
_SURFACE = "surface"
_AFTER_BRACKET = "after_bracket"
_PAYLOAD = "payload"


@dataclass(frozen=True)
class EntitySpan:
    """An entity mention: half-open [start, end) range in the plain text."""

    marker_id: str
    surface: str
    start: int
    end: int

    def to_dict(self) -> dict:
        return {
            "marker_id": self.marker_id,
            "surface": self.surface,
            "start": self.start,
            "end": self.end,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EntitySpan":
        return cls(obj["marker_id"], obj["surface"], obj["start"], obj["end"])


@dataclass(frozen=True)
class RelationSpan:
    marker_id: str
    surface: str
    subject_ref: str
    object_ref: str
    start: int
    end: int

    def to_dict(self) -> dict:
        return {
            "marker_id": self.marker_id,
            "surface": self.surface,
            "subject_ref": self.subject_ref,
            "object_ref": self.object_ref,
            "start": self.start,
            "end": self.end,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RelationSpan":
        return cls(
            obj["marker_id"],
            obj["surface"],
            obj["subject_ref"],
            obj["object_ref"],
            obj["start"],
            obj["end"],
        )


@dataclass(frozen=True)
class Triple:
    """(subject, relation, object) extracted from one accepted relation span."""

    subject_surface: str
    relation_surface: str
    object_surface: str
    subject_id: str
    relation_id: str
    object_id: str

    def to_dict(self) -> dict:
        return {
            "subject_surface": self.subject_surface,
            "relation_surface": self.relation_surface,
            "object_surface": self.object_surface,
            "subject_id": self.subject_id,
            "relation_id": self.relation_id,
            "object_id": self.object_id,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Triple":
        return cls(
            obj["subject_surface"],
            obj["relation_surface"],
            obj["object_surface"],
            obj["subject_id"],
            obj["relation_id"],
            obj["object_id"],
        )

    def with_namespaced_ids(self, prefix: str) -> "Triple":
        return replace(
            self,
            subject_id=f"{prefix}{self.subject_id}",
            relation_id=f"{prefix}{self.relation_id}",
            object_id=f"{prefix}{self.object_id}",
        )


@dataclass(frozen=True)
class Diagnostic:
    code: str
    detail: str

    def to_dict(self) -> dict:
        return {"code": self.code, "detail": self.detail}

    @classmethod
    def from_dict(cls, obj: dict) -> "Diagnostic":
        return cls(obj["code"], obj["detail"])


@dataclass(frozen=True)
class AnnotatedResponse:
    plain_text: str
    entities: tuple[EntitySpan, ...]
    relations: tuple[RelationSpan, ...]
    triples: tuple[Triple, ...]
    diagnostics: tuple[Diagnostic, ...]

    def to_dict(self) -> dict:
        return {
            "plain_text": self.plain_text,
            "entities": [s.to_dict() for s in self.entities],
            "relations": [s.to_dict() for s in self.relations],
            "triples": [t.to_dict() for t in self.triples],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AnnotatedResponse":
        return cls(
            obj["plain_text"],
            tuple(EntitySpan.from_dict(s) for s in obj["entities"]),
            tuple(RelationSpan.from_dict(s) for s in obj["relations"]),
            tuple(Triple.from_dict(t) for t in obj["triples"]),
            tuple(Diagnostic.from_dict(d) for d in obj["diagnostics"]),
        )

    def with_namespaced_ids(self, prefix: str) -> "AnnotatedResponse":
        """Copy with every marker id prefixed, for collision-free aggregation."""
        return AnnotatedResponse(
            plain_text=self.plain_text,
            entities=tuple(
                replace(s, marker_id=f"{prefix}{s.marker_id}") for s in self.entities
            ),
            relations=tuple(
                replace(
                    s,
                    marker_id=f"{prefix}{s.marker_id}",
                    subject_ref=f"{prefix}{s.subject_ref}",
                    object_ref=f"{prefix}{s.object_ref}",
                )
                for s in self.relations
            ),
            triples=tuple(t.with_namespaced_ids(prefix) for t in self.triples),
            diagnostics=self.diagnostics,
        )


@dataclass
class AnnotationParser:
    """Incremental parser state. Single-owner: feed chunks, then finalize."""

    _mode: str = _TEXT
    _surface: list[str] = field(default_factory=list)
    _payload: list[str] = field(default_factory=list)
    _plain_parts: list[str] = field(default_factory=list)
    _plain_len: int = 0
    _entities: list[EntitySpan] = field(default_factory=list)
    _relations: list[RelationSpan] = field(default_factory=list)
    _entity_ids: set[str] = field(default_factory=set)
    _relation_ids: set[str] = field(default_factory=set)
    _diagnostics: list[Diagnostic] = field(default_factory=list)
    _result: AnnotatedResponse | None = None

    def feed(self, chunk: str) -> tuple[str, list[EntitySpan | RelationSpan]]:
        """Consume a chunk; return (new plain text, spans completed by it).

        Relation spans are emitted as soon as they close syntactically;
        ones whose entity references never resolve are dropped from the
        final response with a diagnostic.
        """
        if self._result is not None:
            raise RuntimeError("parser already finalized")
        emitted: list[str] = []
        completed: list[EntitySpan | RelationSpan] = []
        i = 0
        n = len(chunk)
        while i < n:
            ch = chunk[i]
            if self._mode == _TEXT:
                bracket = chunk.find("[", i)
                if bracket == -1:
                    self._emit(chunk[i:], emitted)
                    break
                self._emit(chunk[i:bracket], emitted)
                self._mode = _SURFACE
                self._surface = []
                i = bracket + 1
            elif self._mode == _SURFACE:
                if ch == "]":
                    self._mode = _AFTER_BRACKET
                    i += 1
                elif ch == "[":
                    # nested open bracket: the earlier candidate was literal
                    self._emit("[" + "".join(self._surface), emitted)
                    self._diagnostics.append(
                        Diagnostic("NestedMarker", "".join(self._surface))
                    )
                    self._surface = []
                    i += 1
                else:
                    self._surface.append(ch)
                    i += 1
            elif self._mode == _AFTER_BRACKET:
                if ch == "(":
                    self._mode = _PAYLOAD
                    self._payload = []
                    i += 1
                else:
                    # plain bracketed prose, not a marker
                    self._emit("[" + "".join(self._surface) + "]", emitted)
                    self._mode = _TEXT
                    self._surface = []
                    # current char reprocessed in text mode
            elif self._mode == _PAYLOAD:
                close = chunk.find(")", i)
                if close == -1:
                    self._payload.append(chunk[i:])
                    break
                self._payload.append(chunk[i:close])
                span = self._close_marker(emitted)
                if span is not None:
                    completed.append(span)
                self._mode = _TEXT
                self._surface = []
                self._payload = []
                i = close + 1
        return "".join(emitted), completed

    def finalize(self) -> AnnotatedResponse:
        """Resolve relation references and assemble the response."""
        if self._result is not None:
            return self._result
        self._flush_partial()
        known = {span.marker_id for span in self._entities}
        accepted: list[RelationSpan] = []
        for span in self._relations:
            missing = [ref for ref in (span.subject_ref, span.object_ref) if ref not in known]
            if missing:
                for ref in missing:
                    self._diagnostics.append(Diagnostic("UnresolvedEntityRef", ref))
                continue
            accepted.append(span)
        by_id = {span.marker_id: span for span in self._entities}
        triples = tuple(
            Triple(
                subject_surface=by_id[span.subject_ref].surface,
                relation_surface=span.surface,
                object_surface=by_id[span.object_ref].surface,
                subject_id=span.subject_ref,
                relation_id=span.marker_id,
                object_id=span.object_ref,
            )
            for span in accepted
        )
        self._result = AnnotatedResponse(
            plain_text="".join(self._plain_parts),
            entities=tuple(self._entities),
            relations=tuple(accepted),
            triples=triples,
            diagnostics=tuple(self._diagnostics),
        )
        return self._result

    # -- internals --

    def _emit(self, text: str, emitted: list[str]) -> None:
        if not text:
            return
        self._plain_parts.append(text)
        self._plain_len += len(text)
        emitted.append(text)

    def _close_marker(self, emitted: list[str]) -> EntitySpan | RelationSpan | None:
        surface = "".join(self._surface)
        payload = "".join(self._payload)
        entity = ENTITY_PAYLOAD.match(payload)
        relation = RELATION_PAYLOAD.match(payload) if entity is None else None
        if entity is None and relation is None or not surface:
            self._emit(f"[{surface}]({payload})", emitted)
            self._diagnostics.append(Diagnostic("UnknownMarkerForm", f"({payload})"))
            return None
        start = self._plain_len
        if entity is not None:
            marker_id = f"$n{entity.group(1)}"
            if marker_id in self._entity_ids:
                self._emit(surface, emitted)
                self._diagnostics.append(Diagnostic("DuplicateMarkerId", marker_id))
                return None
            self._emit(surface, emitted)
            span = EntitySpan(marker_id, surface, start, start + len(surface))
            self._entities.append(span)
            self._entity_ids.add(marker_id)
            return span
        assert relation is not None
        marker_id = f"$r{relation.group(1)}"
        subject_ref = f"$n{relation.group(2)}"
        object_ref = f"$n{relation.group(3)}"
        if marker_id in self._relation_ids:
            self._emit(surface, emitted)
            self._diagnostics.append(Diagnostic("DuplicateMarkerId", marker_id))
            return None
        if subject_ref == object_ref:
            self._emit(surface, emitted)
            self._diagnostics.append(Diagnostic("SelfReferentialRelation", marker_id))
            return None
        self._emit(surface, emitted)
        span = RelationSpan(marker_id, surface, subject_ref, object_ref, start, start + len(surface))
        self._relations.append(span)
        self._relation_ids.add(marker_id)
        return span

    def _flush_partial(self) -> None:
        literal = ""
        if self._mode == _SURFACE:
            literal = "[" + "".join(self._surface)
        elif self._mode == _AFTER_BRACKET:
            literal = "[" + "".join(self._surface) + "]"
        elif self._mode == _PAYLOAD:
            literal = "[" + "".join(self._surface) + "](" + "".join(self._payload)
            self._diagnostics.append(Diagnostic("UnterminatedMarker", literal))
        if literal:
            self._plain_parts.append(literal)
            self._plain_len += len(literal)
        self._mode = _TEXT
        self._surface = []
        self._payload = []


def begin() -> AnnotationParser:
    return AnnotationParser()


def parse_chunk(
    state: AnnotationParser, chunk: str
) -> tuple[AnnotationParser, str, list[EntitySpan | RelationSpan]]:
    text, spans = state.feed(chunk)
    return state, text, spans


def finalize(state: AnnotationParser) -> AnnotatedResponse:
    return state.finalize()


def parse(raw: str) -> AnnotatedResponse:
    """One-shot parse; identical to feeding `raw` as a single chunk."""
    state = begin()
    state.feed(raw)
    return state.finalize()
