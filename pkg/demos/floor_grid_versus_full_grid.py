"""
Why sweep only the floor polytope
=================================

The coordinate floors shrink the search box for the level-set grid.  With
four parts, a 20-point sweep of the floor polytope is compared to a
100-point sweep of the whole simplex on the same data.
"""

import simplexconf as sc

out = sc.compare_hdr_vs_full(sc.scenario("1a", D=4), iterations=30, m_hdr=20, m_full=100,
                             seed=3)
for s in out:
    print(f"{s.method:15s} coverage {s.empirical_coverage:5.1f}%  "
          f"time per point {s.mean_time_seconds * 1e3:7.2f} ms  "
          f"widths {tuple(round(w, 3) for w in s.mean_widths)}")
print("speed-up: %.1fx" % (out[1].mean_time_seconds / out[0].mean_time_seconds))
