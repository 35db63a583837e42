import json
import time
from liecover.chevgrp import build_group
from liecover.gf import make_field
from liecover import verifier as V


def show(label, rec, keys=None):
    if keys is None:
        keys = [k for k in rec if k not in ("check", "witnesses")]
    keep = {k: rec[k] for k in keys if k in rec}
    print(label, rec.get("verdict"), json.dumps(keep, default=str)[:300])


t0 = time.time()
rec = V.check_order_formulas([("A", 1, 5, 1), ("A", 2, 3, 1), ("2A", 2, 3, 2), ("C", 2, 2, 1)])
show("order-formulas", rec)

rec = V.check_twisted_rules()
show("twisted-mult-rules", rec)

ctx = build_group("A", 2, make_field(3, 1))
rec = V.check_aut_laws(ctx, seed=7)
show("aut-laws SL3(3)", rec)

A5 = V.alternating_group(5)
rec = V.class_covering_census(A5, q=2)
show("census A5 q=2", rec)

sl27 = build_group("A", 1, make_field(7, 1))
P7 = V.group_from_context(sl27, modulo_center=True)
rec = V.class_covering_census(P7, q=2)
show("census PSL2(7) q=2", rec)

rec = V.check_lemma_71("a", seed=3, sweep=40, threshold_count=50)
show("lemma-7.1a", rec)
rec = V.check_lemma_71("b", seed=3, sweep=40, threshold_count=50)
show("lemma-7.1b", rec)

sl45 = build_group("A", 3, make_field(5, 1))
rec = V.check_lemma_91(sl45)
show("lemma-9.1 SL4(5)", rec)

F5 = make_field(5, 1)
g = tuple(tuple(1 if i == j else (2 if j == i + 1 else 0) for j in range(4)) for i in range(4))
rec = V.check_layer_maps(sl45, g)
show("linmap proper", rec)
g2 = tuple(tuple(1 if i == j else (3 if (j == i + 1 and i != 1) else 0) for j in range(4)) for i in range(4))
rec = V.check_layer_maps(sl45, g2)
show("linmap nonproper", rec)

shift = ((0, 1), (1, 1))
rec = V.check_lemma_32(2, [shift], [2])
show("lemma-3.2", rec)
rec = V.check_lemma_32(2, [shift], [3])
show("lemma-3.2 degenerate", rec)
print("total %.1fs" % (time.time() - t0))
