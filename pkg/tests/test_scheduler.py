import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streamlabel.errors import ContractError
from streamlabel.sim.models import PARALLEL, SERIAL, KernelSpec, optimal_division
from streamlabel.sim.scheduler import (
    FAST,
    GPU,
    SLOW,
    HardwareModel,
    HardwareState,
    KernelInstance,
    StepWorkload,
    get_strategy,
    place,
    policy_order,
    simulate,
    simulate_all,
)

NO_IDLE = {FAST: 0.0, SLOW: 0.0, GPU: 0.0}


def serial(name, t, hf=None):
    return KernelSpec(name, SERIAL, False, hf, t, 2 * t, 0.0, 0.0, 0.0, 0.0)


def big(name, t=10.0, hf=None):
    return KernelSpec(name, PARALLEL, True, hf, t, 2 * t, 0.2 * t, 0.02 * t, 0.01 * t, 0.95)


def small(name, t=0.1, hf=None):
    return KernelSpec(name, PARALLEL, False, hf, t, 2 * t, t, t, 0.05 * t, 0.6)


def test_single_serial_kernel_under_st1():
    rep = simulate([StepWorkload((serial("a", 10.0),), 1)], "ST.1")
    assert rep.total_time == 10.0 and rep.speedup_vs_st1 == 1.0


def test_two_serial_kernels():
    w = [StepWorkload((serial("a", 10.0), serial("b", 10.0)), 1)]
    assert simulate(w, "ST.1").total_time == 20.0
    rep = simulate(w, "ST.2")
    assert rep.total_time == 10.0 and rep.speedup_vs_st1 == 2.0


def test_serial_kernel_goes_to_fast_core():
    state = HardwareState.for_strategy(HardwareModel(), get_strategy("ST.6"))
    (pl,) = place([KernelInstance(serial("a", 1.0))], "ST.6", state, 1)
    assert pl.units == ((FAST, 0),) and pl.duration == 1.0


def test_small_kernel_falls_back_to_slow_cores():
    hw = HardwareModel()
    state = HardwareState.for_strategy(hw, get_strategy("ST.6"))
    state.take(FAST, hw.n_fast)
    (pl,) = place([KernelInstance(small("s"))], "ST.6", state, 2)
    assert {u[0] for u in pl.units} == {SLOW}
    state = HardwareState.for_strategy(hw, get_strategy("ST.4"))
    state.take(FAST, hw.n_fast)
    (pl,) = place([KernelInstance(serial("t", 1.0))], "ST.4", state, 2)
    assert pl.units == ((SLOW, 0),) and pl.duration == 2.0


def test_big_kernel_under_st6_follows_optimal_division():
    hw = HardwareModel()
    k = big("b")
    state = HardwareState.for_strategy(hw, get_strategy("ST.6"))
    (pl,) = place([KernelInstance(k)], "ST.6", state, 5)
    want = optimal_division(k, 5, hw.n_fast, hw.n_slow, hw.gpu)
    assert pl.division == want
    assert sum(1 for u in pl.units if u[0] == FAST) == want.n_t_fast
    assert sum(1 for u in pl.units if u[0] == SLOW) == want.n_t_slow
    assert any(u[0] == GPU for u in pl.units) == want.uses_gpu


def test_naive_splits():
    hw = HardwareModel()
    for name, w in (("ST.2", (0.5, 0.5, 0.0)), ("ST.3", (1 / 3, 1 / 3, 1 / 3))):
        state = HardwareState.for_strategy(hw, get_strategy(name))
        (pl,) = place([KernelInstance(big("b"))], name, state, 1)
        d = pl.division
        assert (d.n_t_fast, d.n_t_slow) == (4, 4)
        assert (d.w_fast, d.w_slow, d.w_acc) == pytest.approx(w)


def test_fifo_blocks_at_head_but_policy_skips():
    hw = HardwareModel()
    ready = [KernelInstance(big("b"), 0), KernelInstance(serial("s", 1.0), 1)]
    state = HardwareState.for_strategy(hw, get_strategy("ST.3"))
    state.take(FAST, 4), state.take(SLOW, 4), state.take(GPU, 1)
    assert place(ready, "ST.3", state, 1) == []
    state = HardwareState.for_strategy(hw, get_strategy("ST.4"))
    state.take(SLOW, 4), state.take(GPU, 1), state.take(FAST, 3)
    out = place(ready, "ST.4", state, 1)
    assert [p.kernel.name for p in out] == ["b"]  # b grabs the last fast core; s has none left


def test_policy_order_round_robin_longest_first():
    ks = [KernelInstance(big(f"k{h}{j}", t=1.0 + j, hf=h), i)
          for i, (h, j) in enumerate((h, j) for h in range(3) for j in range(2))]
    order = [k.name for k in policy_order(ks, 1, cursor=1, num_hf=3)]
    assert order == ["k11", "k21", "k01", "k10", "k20", "k00"]


def test_energy_single_unit():
    hw = HardwareModel(1, 0, False, {FAST: 2.0}, dict(NO_IDLE))
    rep = simulate([StepWorkload((serial("a", 10.0),), 1)], "ST.1", hw)
    assert rep.energy == 20.0


def test_energy_linear_in_time():
    w1 = [StepWorkload((big("a", 3.0), serial("b", 2.0)), 2)]
    w2 = [StepWorkload((big("a", 6.0), serial("b", 4.0)), 2)]
    for s in ("ST.1", "ST.4", "ST.6"):
        e1, e2 = simulate(w1, s).energy, simulate(w2, s).energy
        assert e2 == pytest.approx(2 * e1, rel=1e-9)


def kernels():
    t = st.floats(0.01, 10.0)
    kind = st.sampled_from(["serial", "big", "small"])
    return st.lists(st.tuples(kind, t, st.one_of(st.none(), st.integers(0, 5))), min_size=1, max_size=12)


def build(spec):
    f = {"serial": serial, "big": big, "small": small}
    return tuple(f[k](f"{k}{i}", t, hf) if k != "serial" else serial(f"s{i}", t, hf)
                 for i, (k, t, hf) in enumerate(spec))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(kernels(), st.integers(1, 10)), min_size=1, max_size=4),
       st.sampled_from(["ST.1", "ST.2", "ST.3", "ST.4", "ST.5", "ST.6"]))
def test_conservation_barrier_and_st2_bound(steps, strategy):
    w = [StepWorkload(build(ks), n_l) for ks, n_l in steps]
    rep = simulate(w, strategy, keep_placements=True)
    for u, b in rep.busy.items():
        assert b + rep.idle[u] == pytest.approx(rep.total_time)
        assert b <= rep.total_time * (1 + 1e-12)
    ends, starts = {}, {}
    for step, _, _, _, s, e in rep.placements:
        ends[step] = max(ends.get(step, 0.0), e)
        starts[step] = min(starts.get(step, float("inf")), s)
    for i in range(1, len(w)):
        assert starts[i] >= ends[i - 1] - 1e-12
    if strategy == "ST.2":
        assert rep.speedup_vs_st1 <= 8 + 1e-9


def test_st1_alone_has_unit_speedup():
    w = [StepWorkload((big("a"), serial("b", 1.0)), 3)]
    reps = simulate_all(w, strategies=["ST.1"])
    assert list(reps) == ["ST.1"] and reps["ST.1"].speedup_vs_st1 == 1.0


def test_unknown_strategy():
    with pytest.raises(ContractError):
        get_strategy("ST.7")
    assert get_strategy("st6").name == "ST.6"


def test_deterministic_reports():
    w = [StepWorkload(build([("big", 2.0, 1), ("small", 0.1, None), ("serial", 1.0, 2)]), 4)] * 3
    a = simulate_all(w)
    b = simulate_all(w)
    assert {n: r.as_dict() for n, r in a.items()} == {n: r.as_dict() for n, r in b.items()}
