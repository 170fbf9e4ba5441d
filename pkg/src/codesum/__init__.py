"""Neural code summarization from token sequences and syntax trees.

Pipeline: a dataset of (code, summary, AST) records is tokenized and
vocabularized (`corpus`), ASTs are validated and turned into normalized
graph inputs (`asts`), token/leaf alignment is computed (`align`), the
two modalities are encoded and fused (`encoders`, `fusion`), and a
transformer decoder generates summaries (`decode`). Training lives in
`trainer`, scoring in `metrics`, and the command-line surface in `cli`.
"""

__version__ = "0.1.0"
