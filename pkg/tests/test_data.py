import numpy as np
import pytest

from clusterfx.data import (
    ClusterRecord,
    ClusterStatus,
    StudyData,
    cell_index,
    cell_label,
    dump_csv,
    load_csv,
    validate,
)
from clusterfx.errors import DataError, DuplicateKey, EmptyCell, MalformedRow, NonContiguousGroups

from conftest import random_studies


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_cell_index_roundtrip():
    for T in range(1, 5):
        idx = [cell_index(g, l) for g in range(1, T + 1) for l in (1, 2)]
        assert idx == list(range(2 * T))
        assert [cell_label(i) for i in idx] == [(g, l) for g in range(1, T + 1) for l in (1, 2)]


def test_load_groups_visits_into_one_complete_cluster(tmp_path):
    p = write(tmp_path, "group,cluster,period,visit,value\n1,a,1,2,5\n1,a,1,1,3\n1,a,2,1,4\n")
    data = load_csv(p)
    (c,) = data.clusters
    assert c.status is ClusterStatus.COMPLETE
    assert c.pre == (3.0, 5.0)
    assert c.post == (4.0,)
    assert data.cluster_sizes.tolist() == [[2, 1]]


def test_pre_only_cluster_counts_as_incomplete(tmp_path):
    p = write(
        tmp_path,
        "group,cluster,period,visit,value\n1,a,1,1,3\n1,a,2,1,4\n1,b,1,1,2\n",
    )
    data = load_csv(p)
    b = data.clusters[1]
    assert b.status is ClusterStatus.INCOMPLETE_PRE
    assert data.n_incomplete[0].tolist() == [1, 0]
    assert data.n_complete.tolist() == [1]


def test_empty_cell_rejected(fixtures):
    with pytest.raises(EmptyCell) as err:
        load_csv(fixtures / "empty_cell.csv")
    assert (err.value.group, err.value.period) == (2, 2)


def test_malformed_row_reports_line(fixtures):
    with pytest.raises(MalformedRow) as err:
        load_csv(fixtures / "malformed.csv")
    assert err.value.line == 3


@pytest.mark.parametrize(
    "body, exc",
    [
        ("1,a,1,1,3\n1,a,1,1,4\n1,a,2,1,1\n", DuplicateKey),
        ("1,a,3,1,3\n", MalformedRow),
        ("1,a,1,1,nan\n", MalformedRow),
        ("1,a,1,1\n", MalformedRow),
        ("1,a,1,1,1\n1,a,2,1,1\n3,b,1,1,1\n3,b,2,1,1\n", NonContiguousGroups),
    ],
)
def test_load_errors(tmp_path, body, exc):
    p = write(tmp_path, "group,cluster,period,visit,value\n" + body)
    with pytest.raises(exc):
        load_csv(p)


def test_missing_header(tmp_path):
    with pytest.raises(MalformedRow):
        load_csv(write(tmp_path, "1,a,1,1,3\n"))


def test_comments_and_blank_lines_skipped(fixtures):
    data = load_csv(fixtures / "small.csv")
    assert data.T == 2
    assert data.N == 18


def test_cluster_without_observations_rejected():
    with pytest.raises(DataError):
        ClusterRecord(1, "x")


def test_duplicate_cluster_id_rejected():
    c = ClusterRecord(1, "x", (1,), (2,))
    with pytest.raises(DataError):
        StudyData(1, (c, c))


def test_roundtrip(tmp_path):
    for data in random_studies(20, seed=3):
        p = dump_csv(data, tmp_path / "rt.csv")
        again = load_csv(p)
        assert again == data


def test_roundtrip_keeps_full_precision(tmp_path):
    data = StudyData(1, (ClusterRecord(1, "a", (0.1 + 0.2,), (1 / 3,)),))
    again = load_csv(dump_csv(data, tmp_path / "p.csv"))
    assert again.clusters[0].pre == (0.1 + 0.2,)
    assert again.clusters[0].post == (1 / 3,)


def test_count_consistency():
    for data in random_studies(30, seed=4):
        for j in range(data.T):
            ids = {c.cluster_id for c in data.clusters if c.group == j + 1}
            assert data.n_complete[j] + data.n_incomplete[j].sum() == len(ids)
        assert data.N_cell.sum() == data.N
        assert data.N_j.sum() == data.N


def test_validate_warnings():
    one = StudyData(
        2,
        (
            ClusterRecord(1, "a", (1,), (2,)),
            ClusterRecord(1, "b", (1,), ()),
            ClusterRecord(1, "c", (1,), ()),
            ClusterRecord(1, "d", (), (1,)),
            ClusterRecord(1, "e", (), (1,)),
            ClusterRecord(2, "f", (1,), (2,)),
            ClusterRecord(2, "g", (1,), (2,)),
            ClusterRecord(2, "h", (), (1,)),
            ClusterRecord(2, "i", (), (1,)),
        ),
    )
    notes = validate(one)
    assert "tau not estimable for group 1" in notes
    assert "eta(2,1) contribution set to zero" in notes
    assert "eta(1,1) contribution set to zero" not in notes


def test_validate_clean_for_balanced_design():
    clusters = []
    for g in (1, 2):
        for k in range(2):
            clusters.append(ClusterRecord(g, f"c{k}", (1, 2), (3,)))
            clusters.append(ClusterRecord(g, f"p{k}", (1,), ()))
            clusters.append(ClusterRecord(g, f"q{k}", (), (2,)))
    assert validate(StudyData(2, tuple(clusters))) == []


def test_validate_large_cluster():
    data = StudyData(1, (ClusterRecord(1, "big", np.arange(51.0), (1,)),))
    assert any("exceeds" in w for w in validate(data))
