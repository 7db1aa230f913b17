"""Iterative Tarjan strongly-connected components."""

from __future__ import annotations


def tarjan_scc(vertices, successors) -> list[list]:
    """SCCs of the directed graph, emitted dependencies-first.

    ``successors`` maps a vertex to an iterable of successors. Each SCC is
    complete before any SCC that depends on it appears, so evaluating the
    returned list in order visits prerequisites first.
    """
    index = {}
    low = {}
    on_stack = set()
    stack = []
    sccs = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                elif w in on_stack:
                    if index[w] < low[v]:
                        low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w is v or w == v:
                        break
                sccs.append(comp)
    return sccs
