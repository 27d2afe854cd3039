from blendsolve.csvio import csv_text, fmt


def test_float_round_trip_at_17_digits():
    values = [1.0 / 3.0, 0.1, 2.3 / 3000, 1e-300, -0.0]
    for v in values:
        assert float(fmt(v)) == v


def test_field_kinds():
    assert fmt(None) == ""
    assert fmt(True) == "true"
    assert fmt(False) == "false"
    assert fmt(12) == "12"
    assert fmt("x") == "x"


def test_csv_text_layout():
    text = csv_text(["a", "b"], [(1, 2.5), (None, False)], comments=["k = v"])
    assert text == "# k = v\na,b\n1,2.5\n,false\n"
