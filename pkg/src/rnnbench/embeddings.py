"""Pretrained word-vector ingestion and token resolution.

The table is static: nothing in the training path may write to it, and
out-of-vocabulary tokens resolve to cached random vectors that depend
only on (seed, token), never on lookup order.
"""

import numpy as np

from .errors import DimensionError, EmptyInputError, ParseError
from .numkit import Rng, derive_seed

# Out-of-vocabulary vectors are drawn per component from
# [-OOV_RANGE, +OOV_RANGE]; roughly matches the variance of the published
# pretrained vectors.
OOV_RANGE = 0.25


class EmbeddingTable:
    """Frozen token -> R^dim map with a deterministic OOV policy."""

    def __init__(self, dim, vocab, vectors, seed=0, oov_range=OOV_RANGE):
        self.dim = dim
        self.vocab = vocab                      # token -> row index
        self.vectors = vectors                  # |vocab| x dim float64
        self.vectors.flags.writeable = False    # static through all training
        self.seed = seed
        self.oov_range = oov_range
        self.oov_cache: dict[str, np.ndarray] = {}

    def __len__(self):
        return len(self.vocab)

    def checksum(self) -> int:
        """Bit-level checksum of the stored vectors (static-embedding audit)."""
        import zlib

        return zlib.crc32(np.ascontiguousarray(self.vectors).tobytes())

    def lookup(self, token: str) -> np.ndarray:
        """Resolve a token to its vector; total function.

        Verbatim match first, lowercased fallback second, then a cached
        random vector fully determined by (seed, token).
        """
        idx = self.vocab.get(token)
        if idx is None:
            idx = self.vocab.get(token.lower())
        if idx is not None:
            return self.vectors[idx]
        vec = self.oov_cache.get(token)
        if vec is None:
            rng = Rng(derive_seed(self.seed, "oov", token))
            vec = rng.uniform(-self.oov_range, self.oov_range, self.dim)
            vec.flags.writeable = False
            self.oov_cache[token] = vec
        return vec

    def embed_sentence(self, tokens: list[str]) -> np.ndarray:
        """Stack lookups into an m x dim input matrix (non-trainable)."""
        if not tokens:
            raise EmptyInputError("cannot embed an empty token list")
        out = np.empty((len(tokens), self.dim), dtype=np.float64)
        for j, tok in enumerate(tokens):
            out[j] = self.lookup(tok)
        return out


def lookup(table: EmbeddingTable, token: str) -> np.ndarray:
    return table.lookup(token)


def embed_sentence(table: EmbeddingTable, tokens: list[str]) -> np.ndarray:
    return table.embed_sentence(tokens)


def _parse_header(line: bytes, offset: int):
    parts = line.split()
    if len(parts) != 2:
        raise ParseError(f"malformed header {line!r}", offset=offset)
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"non-numeric header {line!r}", offset=offset) from None
    if count < 0 or dim < 1:
        raise ParseError(f"invalid header values {count} {dim}", offset=offset)
    return count, dim


def load_word2vec_binary(path, expected_dim=None, restrict_vocab=None,
                         seed=0, oov_range=OOV_RANGE) -> EmbeddingTable:
    """Load the binary word2vec format.

    Format: ASCII header "<vocab_count> <dim>\\n", then per entry the
    token bytes terminated by a single 0x20, followed by dim float32
    little-endian values, optionally followed by 0x0A.  Floats are
    widened to float64.  `restrict_vocab` keeps only the listed tokens
    (the rest become OOV downstream), which keeps multi-gigabyte vector
    files loadable at desk scale.
    """
    with open(path, "rb") as f:
        data = f.read()
    pos = data.find(b"\n")
    if pos < 0:
        raise ParseError("missing header line", offset=0)
    count, dim = _parse_header(data[:pos], 0)
    if expected_dim is not None and dim != expected_dim:
        raise DimensionError(f"expected dim {expected_dim}, file declares {dim}")
    pos += 1

    vec_bytes = 4 * dim
    keep = restrict_vocab if restrict_vocab is None else set(restrict_vocab)
    vocab: dict[str, int] = {}
    rows = []
    for _ in range(count):
        sp = data.find(b" ", pos)
        if sp < 0:
            raise ParseError("unterminated token", offset=pos)
        token = data[pos:sp].decode("utf-8", errors="replace")
        pos = sp + 1
        if pos + vec_bytes > len(data):
            raise ParseError("truncated vector payload", offset=pos)
        if keep is None or token in keep:
            vec = np.frombuffer(data, dtype="<f4", count=dim, offset=pos)
            if token not in vocab:          # first occurrence wins
                vocab[token] = len(rows)
                rows.append(vec.astype(np.float64))
        pos += vec_bytes
        if pos < len(data) and data[pos] == 0x0A:
            pos += 1
    if pos != len(data):
        raise ParseError("trailing bytes after last entry", offset=pos)

    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingTable(dim, vocab, vectors, seed=seed, oov_range=oov_range)


def load_word2vec_text(path, expected_dim=None, restrict_vocab=None,
                       seed=0, oov_range=OOV_RANGE) -> EmbeddingTable:
    """Load the text format: one entry per line, token then dim decimals.

    Values pass through float32 so text and binary encodings of the same
    table load equal.
    """
    keep = restrict_vocab if restrict_vocab is None else set(restrict_vocab)
    vocab: dict[str, int] = {}
    rows = []
    dim = expected_dim
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            token, fields = parts[0], parts[1:]
            if dim is None:
                if not fields:
                    raise ParseError("entry has no values", line=lineno)
                dim = len(fields)
            if len(fields) != dim:
                raise ParseError(
                    f"expected {dim} values, found {len(fields)}", line=lineno)
            if keep is not None and token not in keep:
                continue
            try:
                vec = np.array(fields, dtype=np.float32)
            except ValueError:
                raise ParseError("non-numeric vector value", line=lineno) from None
            if token not in vocab:
                vocab[token] = len(rows)
                rows.append(vec.astype(np.float64))
    if dim is None:
        raise ParseError("empty embedding file", line=1)
    vectors = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return EmbeddingTable(dim, vocab, vectors, seed=seed, oov_range=oov_range)


def load_embeddings(path, expected_dim=None, restrict_vocab=None,
                    seed=0, oov_range=OOV_RANGE) -> EmbeddingTable:
    """Dispatch on suffix: .txt/.vec load as text, everything else binary."""
    loader = load_word2vec_text if str(path).endswith((".txt", ".vec")) \
        else load_word2vec_binary
    return loader(path, expected_dim=expected_dim, restrict_vocab=restrict_vocab,
                  seed=seed, oov_range=oov_range)
