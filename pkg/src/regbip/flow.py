"""
Dinic's maximum flow on small integral networks and Hopcroft-Karp matching.
"""

from __future__ import annotations

from collections import deque

__all__ = ["FlowNetwork", "hopcroft_karp"]


class FlowNetwork:
    """Adjacency-list residual network; arcs are stored in pairs (i, i ^ 1)."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_arc(self, u: int, v: int, c: int) -> int:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        return len(self.to) - 2

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        to, cap, head = self.to, self.cap, self.head
        while True:
            level = [-1] * self.n
            level[s] = 0
            q = deque([s])
            while q:
                u = q.popleft()
                for a in head[u]:
                    if cap[a] > 0 and level[to[a]] < 0:
                        level[to[a]] = level[u] + 1
                        q.append(to[a])
            if level[t] < 0:
                return flow
            it = [0] * self.n
            # blocking flow by iterative DFS with current-arc pointers
            while True:
                path: list[int] = []
                u = s
                while u != t:
                    hu = head[u]
                    while it[u] < len(hu):
                        a = hu[it[u]]
                        if cap[a] > 0 and level[to[a]] == level[u] + 1:
                            break
                        it[u] += 1
                    else:
                        if u == s:
                            break
                        level[u] = -1  # dead end
                        a = path.pop()
                        u = to[a ^ 1]
                        it[u] += 1
                        continue
                    path.append(a)
                    u = to[a]
                if u != t:
                    break
                push = min(cap[a] for a in path)
                for a in path:
                    cap[a] -= push
                    cap[a ^ 1] += push
                flow += push

    def reachable(self, s: int) -> list[bool]:
        seen = [False] * self.n
        seen[s] = True
        q = deque([s])
        while q:
            u = q.popleft()
            for a in self.head[u]:
                if self.cap[a] > 0 and not seen[self.to[a]]:
                    seen[self.to[a]] = True
                    q.append(self.to[a])
        return seen


def hopcroft_karp(left: list[int], adj: dict[int, list[int]]) -> dict[int, int]:
    """Maximum matching of a bipartite graph given left vertices and their neighbor lists."""
    INF = float("inf")
    match_l: dict[int, int | None] = {u: None for u in left}
    match_r: dict[int, int] = {}
    dist: dict = {}

    def bfs() -> bool:
        q = deque()
        for u in left:
            if match_l[u] is None:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v in adj.get(u, ()):
                w = match_r.get(v)
                if w is None:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(root) -> bool:
        # iterative augment along the layered graph
        stack = [(root, iter(adj.get(root, ())))]
        trail = []
        while stack:
            u, nbrs = stack[-1]
            advanced = False
            for v in nbrs:
                w = match_r.get(v)
                if w is None:
                    trail.append((u, v))
                    for a, b in trail:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[u] + 1:
                    trail.append((u, v))
                    stack.append((w, iter(adj.get(w, ()))))
                    advanced = True
                    break
            if not advanced:
                dist[u] = INF
                stack.pop()
                if trail:
                    trail.pop()
        return False

    while bfs():
        for u in left:
            if match_l[u] is None:
                dfs(u)
    return {u: v for u, v in match_l.items() if v is not None}
