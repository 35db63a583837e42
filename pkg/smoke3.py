import json
from liecover.chevgrp import CompositeAutomorphism, build_group
from liecover.gf import make_field
from liecover import verifier as V


def diag_aut(ctx, entries):
    mat = tuple(tuple(entries[i] if i == j else 0 for j in range(len(entries)))
                for i in range(len(entries)))
    return CompositeAutomorphism(ctx, conj=mat)


cases = [
    ("SL2(9) diag-twist", "A", 1, 3, 2, lambda ctx: diag_aut(ctx, [1, ctx.field.generator])),
    ("SL2(8) identity", "A", 1, 2, 3, lambda ctx: CompositeAutomorphism.identity(ctx)),
    ("SL3(3) identity", "A", 2, 3, 1, lambda ctx: CompositeAutomorphism.identity(ctx)),
    ("SL3(2) identity", "A", 2, 2, 1, lambda ctx: CompositeAutomorphism.identity(ctx)),
]
for label, kind, rank, p, f, mk in cases:
    ctx = build_group(kind, rank, make_field(p, f))
    G = V.group_from_context(ctx)
    gamma = mk(ctx)
    rec = V.check_theorem_autos(G, [gamma] * 60, [1] * 60, M=60,
                                strategy="proof-recipe")
    keep = {k: rec[k] for k in ("verdict", "minimal_m", "kmin", "covered",
                                "all_inner", "u_plus_covered", "u_minus_covered",
                                "reason", "m_needed") if k in rec}
    print(label, json.dumps(keep))
