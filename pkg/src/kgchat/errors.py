"""Exception types shared across the package."""

from __future__ import annotations


class KgChatError(Exception):
    """Base class for every error raised by this package."""


# --- knowledge graph loading / querying ---


class ParseError(KgChatError):
    """A line of an input file could not be interpreted."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateNodeId(KgChatError):
    def __init__(self, node_id: str):
        super().__init__(f"duplicate node id: {node_id}")
        self.node_id = node_id


class DanglingEndpoint(KgChatError):
    def __init__(self, edge_id: str, endpoint: str):
        super().__init__(f"edge {edge_id} references unknown node {endpoint}")
        self.edge_id = edge_id
        self.endpoint = endpoint


class UnknownNode(KgChatError):
    def __init__(self, node_id: str):
        super().__init__(f"unknown node: {node_id}")
        self.node_id = node_id


# --- embeddings / grounding ---


class ProviderUnavailable(KgChatError):
    """The embedding provider could not produce a vector."""


class EmptyText(KgChatError):
    """Text to embed was empty after trimming."""


class DimensionMismatch(KgChatError):
    def __init__(self, dim_a: int, dim_b: int):
        super().__init__(f"vector dimensions differ: {dim_a} vs {dim_b}")


class ZeroVector(KgChatError):
    """Cosine similarity is undefined for an all-zero vector."""


# --- recommendations ---


class UnknownRecommendation(KgChatError):
    def __init__(self, rec_id: str):
        super().__init__(f"unknown recommendation: {rec_id}")
        self.rec_id = rec_id


class AlreadyExplored(KgChatError):
    def __init__(self, rec_id: str):
        super().__init__(f"recommendation already explored: {rec_id}")
        self.rec_id = rec_id


# --- sessions ---


class SequenceGap(KgChatError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"event sequence gap: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class StepOutOfRange(KgChatError):
    def __init__(self, step: int, count: int):
        super().__init__(f"step {step} out of range (session has {count})")
        self.step = step
        self.count = count


class StoreUnavailable(KgChatError):
    """The session store path cannot be read or written."""


class UnknownSession(KgChatError):
    def __init__(self, session_id: str):
        super().__init__(f"unknown session: {session_id}")
        self.session_id = session_id


class CorruptRecord(KgChatError):
    """A persisted session record failed to deserialize."""


# --- gateway ---


class GatewayError(KgChatError):
    """Transport- or protocol-level failure talking to the chat endpoint."""


class GatewayTimeout(GatewayError):
    """The chat endpoint did not respond within the configured timeout."""


class MissingFixture(GatewayError):
    def __init__(self, template: str, key: str):
        super().__init__(f"no recorded transcript for template={template} key={key}")
        self.template = template
        self.key = key


class UnparseableVerdict(GatewayError):
    """A scope-check completion could not be read as yes/no."""


# --- configuration ---


class ConfigError(KgChatError):
    """Service configuration is missing or out of range."""
