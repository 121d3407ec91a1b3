import numpy as np
import pytest

from pdcgm.data import (
    INSTANCE_DIR,
    format_mcnf,
    format_tssp,
    lands,
    load_mcnf,
    parse_mcnf,
    parse_tssp,
    random_network,
    random_stochastic,
    small_network,
    small_stochastic,
)
from pdcgm.exceptions import InstanceParseError


def test_mcnf_text_is_exact(bottleneck_network):
    net = random_network(7, nodes=6, arcs=15, commodities=3)
    parsed = parse_mcnf(format_mcnf(net))
    assert parsed.num_nodes == net.num_nodes
    assert parsed.arcs == net.arcs
    assert parsed.commodities == net.commodities
    assert format_mcnf(bottleneck_network).splitlines()[0] == "mcnf 3 3 1"


def test_tssp_text_is_exact(newsvendor):
    inst = random_stochastic(3, scenarios=3)
    parsed = parse_tssp(format_tssp(inst))
    np.testing.assert_array_equal(parsed.c, inst.c)
    np.testing.assert_array_equal(parsed.A, inst.A)
    np.testing.assert_array_equal(parsed.b, inst.b)
    for mine, theirs in zip(parsed.scenarios, inst.scenarios):
        assert mine.p == theirs.p
        for key in ("q", "T", "W", "h"):
            np.testing.assert_array_equal(getattr(mine, key), getattr(theirs, key))
    # no first-stage rows
    parsed = parse_tssp(format_tssp(newsvendor))
    assert parsed.A.shape == (0, 1)
    assert parsed.num_scenarios == 2


def test_mcnf_comments_and_blank_lines():
    text = """
    # three nodes
    mcnf 3 2 1
    arc 1 2 1.5 4   # cheap
    arc 2 3 2 4

    commodity 1 3 2.5
    """
    net = parse_mcnf(text, name="tiny")
    assert net.name == "tiny"
    assert net.arcs[0].cost == 1.5
    assert net.commodities[0].demand == 2.5


@pytest.mark.parametrize("text,line", [
    ("arc 1 2 1 1\n", 1),
    ("mcnf 3 1 1\narc 1 2 x 1\ncommodity 1 2 1\n", 2),
    ("mcnf 3 1 1\narc 1 1 1 1\ncommodity 1 2 1\n", 2),
    ("mcnf 3 1 1\narc 1 2 1 1\ncommodity 1 4 1\n", 3),
    ("mcnf 3 1 1\narc 1 2 1 1\nnode 4\n", 3),
    ("mcnf 3 2 1\narc 1 2 1 1\ncommodity 1 2 1\n", 3),
    ("mcnf 3 1 1\narc 1 2 1 1 9\ncommodity 1 2 1\n", 2),
])
def test_mcnf_errors_carry_line_numbers(text, line):
    with pytest.raises(InstanceParseError) as info:
        parse_mcnf(text)
    assert info.value.line == line
    assert f"line {line}:" in info.value.message


def test_empty_mcnf():
    with pytest.raises(InstanceParseError):
        parse_mcnf("# nothing here\n")


@pytest.mark.parametrize("text,line", [
    ("scenario { p = 1; }", 1),
    ("first_stage {\n  c = [1];\n  A = rows [];\n  b = [];\n}\nscenario {\n  p = 1;\n  q = [1, 2];\n"
     "  T = rows [[1]];\n  W = rows [[1]];\n  h = [1];\n}\n", 6),
    ("first_stage {\n  c = [1];\n  A = rows [];\n  b = [];\n  d = [2];\n}\n", 5),
    ("first_stage {\n  c = [1, @];\n", 2),
    ("first_stage {\n  c = [1];\n  A = rows [];\n  b = [];\n}\n"
     "scenario {\n  p = 0.5;\n  q = [1];\n  T = rows [[1]];\n  W = rows [[1]];\n  h = [1];\n}\n", 12),
])
def test_tssp_errors_carry_line_numbers(text, line):
    with pytest.raises(InstanceParseError) as info:
        parse_tssp(text)
    assert info.value.line == line


def test_load_uses_file_stem(tmp_path):
    path = tmp_path / "grid.mcnf"
    path.write_text(format_mcnf(random_network(1)))
    assert load_mcnf(path).name == "grid"


def test_bundled_lands():
    assert (INSTANCE_DIR / "lands.tssp").exists()
    inst = lands()
    assert inst.name == "lands"
    assert inst.num_first == 6
    assert inst.num_scenarios == 3
    assert sum(s.p for s in inst.scenarios) == pytest.approx(1.0)


def test_generators_are_deterministic():
    assert format_mcnf(random_network(11)) == format_mcnf(random_network(11))
    assert format_mcnf(random_network(11)) != format_mcnf(random_network(12))
    assert format_tssp(random_stochastic(11)) == format_tssp(random_stochastic(11))


@pytest.mark.parametrize("seed", range(10))
def test_small_instances_stay_small(seed):
    net = small_network(seed)
    assert net.num_nodes <= 10 and net.num_arcs <= 30 and net.num_commodities <= 5
    inst = small_stochastic(seed)
    assert inst.num_first <= 6 and inst.A.shape[0] <= 4 and inst.num_scenarios <= 10
    assert inst.scenarios[0].W.shape[0] <= 5 and inst.scenarios[0].W.shape[1] <= 8


@pytest.mark.parametrize("seed", range(5))
def test_generated_right_hand_sides_are_exact_hundredths(seed):
    inst = random_stochastic(seed, first=6, first_rows=4, second=8, second_rows=5)
    for rhs in [inst.b] + [s.h for s in inst.scenarios]:
        np.testing.assert_array_equal(rhs, np.round(rhs * 100.0) / 100.0)
