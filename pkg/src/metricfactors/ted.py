"""Zhang-Shasha ordered tree edit distance on unlabeled trees.

Insertions and deletions cost 1 and relabelling is free, so only the
shape of the two trees matters.
"""

from __future__ import annotations

from .conllu import DependencyTree


class _Postorder:
    """Postorder numbering (1-based), leftmost-leaf table and keyroots."""

    __slots__ = ("n", "lml", "keyroots")

    def __init__(self, tree: DependencyTree):
        kids = tree.children()
        n = len(tree)
        lml = [0] * (n + 1)
        order = 0
        # iterative postorder; maps node -> postorder index
        stack = [(tree.root, False)]
        post_of = {}
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order += 1
                post_of[node] = order
                first = kids[node][0] if kids[node] else None
                lml[order] = lml[post_of[first]] if first is not None else order
            else:
                stack.append((node, True))
                for c in reversed(kids[node]):
                    stack.append((c, False))
        seen = {}
        for i in range(1, n + 1):
            seen[lml[i]] = i  # highest node sharing the leftmost leaf
        self.n = n
        self.lml = lml
        self.keyroots = sorted(seen.values())


def tree_edit_distance(t1: DependencyTree, t2: DependencyTree) -> int:
    """Minimum number of node insertions and deletions turning t1 into t2."""
    a, b = _Postorder(t1), _Postorder(t2)
    la, lb = a.lml, b.lml
    td = [[0] * (b.n + 1) for _ in range(a.n + 1)]
    for i in a.keyroots:
        li = la[i]
        for j in b.keyroots:
            lj = lb[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = x
            for y in range(1, cols):
                fd[0][y] = y
            for x in range(1, rows):
                ni = li + x - 1
                row, prev = fd[x], fd[x - 1]
                lni = la[ni]
                for y in range(1, cols):
                    nj = lj + y - 1
                    delete = prev[y] + 1
                    insert = row[y - 1] + 1
                    if lni == li and lb[nj] == lj:
                        best = prev[y - 1]  # relabel is free
                        if delete < best:
                            best = delete
                        if insert < best:
                            best = insert
                        row[y] = best
                        td[ni][nj] = best
                    else:
                        sub = fd[lni - li][lb[nj] - lj] + td[ni][nj]
                        best = sub
                        if delete < best:
                            best = delete
                        if insert < best:
                            best = insert
                        row[y] = best
    return td[a.n][b.n]
