from slap.bench import bench_phase, tlp_ladder


def test_phase_rows():
    rows = bench_phase("pol_ap", reps=10, seed=1)
    assert [r["operation"] for r in rows] == ["pol_ap/client", "pol_ap/ap"]
    assert all(r["reps"] == 10 and r["median_ms"] > 0 for r in rows)


def test_small_ladder_counts_squarings():
    out = tlp_ladder((200, 400), reps=2, bits=256, verify_per_rep=1)
    assert [r["squarings_per_solve"] for r in out["rows"]] == [200, 400]
    assert out["slope_ms_per_squaring"] > 0
