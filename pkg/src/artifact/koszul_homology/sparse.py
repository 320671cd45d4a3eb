"""Integer sparse matrices shared by the ring, Koszul and B-complex layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import ValidationError


@dataclass(frozen=True)
class SparseMatrix:
    """COO matrix with integer entries; duplicates are summed on construction."""

    rows: int
    cols: int
    row: np.ndarray
    col: np.ndarray
    data: np.ndarray

    @staticmethod
    def build(rows: int, cols: int, row, col, data) -> "SparseMatrix":
        row = np.asarray(row, dtype=np.int64)
        col = np.asarray(col, dtype=np.int64)
        data = np.asarray(data, dtype=np.int64)
        if len(row) and (row.min() < 0 or row.max() >= rows or col.min() < 0 or col.max() >= cols):
            raise ValidationError("sparse matrix index out of range")
        m = sp.coo_matrix((data, (row, col)), shape=(rows, cols)).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        c = m.tocoo()
        order = np.lexsort((c.col, c.row))
        return SparseMatrix(
            rows, cols, c.row[order].astype(np.int64), c.col[order].astype(np.int64), c.data[order]
        )

    @staticmethod
    def from_scipy(m) -> "SparseMatrix":
        c = sp.coo_matrix(m)
        return SparseMatrix.build(c.shape[0], c.shape[1], c.row, c.col, c.data)

    @staticmethod
    def zeros(rows: int, cols: int) -> "SparseMatrix":
        e = np.zeros(0, dtype=np.int64)
        return SparseMatrix(rows, cols, e, e, e)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.data)

    def entries(self) -> list[tuple[int, int, int]]:
        return [(int(i), int(j), int(v)) for i, j, v in zip(self.row, self.col, self.data)]

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, (self.row, self.col)), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.build(self.cols, self.rows, self.col, self.row, self.data)

    @staticmethod
    def vstack(blocks: list["SparseMatrix"]) -> "SparseMatrix":
        if not blocks:
            raise ValidationError("nothing to stack")
        cols = blocks[0].cols
        if any(b.cols != cols for b in blocks):
            raise ValidationError("column mismatch in vstack")
        off = 0
        rr, cc, dd = [], [], []
        for b in blocks:
            rr.append(b.row + off)
            cc.append(b.col)
            dd.append(b.data)
            off += b.rows
        return SparseMatrix.build(off, cols, np.concatenate(rr), np.concatenate(cc), np.concatenate(dd))

    @staticmethod
    def hstack(blocks: list["SparseMatrix"]) -> "SparseMatrix":
        return SparseMatrix.vstack([b.transpose() for b in blocks]).transpose()
