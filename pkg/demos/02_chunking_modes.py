"""Compare fixed-window and semantic chunking on the same passage.

Run from the repo root:  python demos/02_chunking_modes.py
"""

import numpy as np

from caprag import ChunkingConfig
from caprag.chunking import chunk_fixed, chunk_semantic
from caprag.embedding import EmbedderSpec, cosine, make_embedder
from caprag.textutil import split_sentences

embed = make_embedder(EmbedderSpec())

passage = (
    "Opening a savings account requires a valid passport. "
    "A savings account application is reviewed within two business days. "
    "The savings account deposit is 50 dinars. "
    "Bond yields rose sharply across euro markets. "
    "Euro bond traders expect further volatility this quarter."
)

print("fixed windows (size 12, overlap 4):")
cfg = ChunkingConfig(mode="fixed", fixed_size=12, fixed_overlap=4)
for i, chunk in enumerate(chunk_fixed(passage, cfg)):
    print(f"  [{i}] {chunk}")

print("\nadjacent-sentence cosine distances:")
sentences = split_sentences(passage)
vectors = [embed(s) for s in sentences]
distances = [1.0 - cosine(vectors[i], vectors[i + 1]) for i in range(len(vectors) - 1)]
for i, d in enumerate(distances):
    print(f"  {i}-{i + 1}: {d:.3f}")
threshold = float(np.percentile(distances, 75.0))
print(f"  75th percentile threshold: {threshold:.3f} (strict exceedance splits)")

print("\nsemantic chunks (percentile 75):")
cfg = ChunkingConfig(mode="semantic", semantic_breakpoint_percentile=75.0)
for i, chunk in enumerate(chunk_semantic(passage, cfg, embed)):
    print(f"  [{i}] {chunk}")
