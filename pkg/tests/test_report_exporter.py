import numpy as np
import pandas as pd

from models.schemas import RunConfig, SimConfig
from processors.report_exporter import ReportExporter, fmt_num


def _run(cheap_params, **kwargs) -> RunConfig:
    return RunConfig(command="ruin", params=cheap_params, **kwargs)


def test_fmt_num():
    assert fmt_num(2.0) == "2"
    assert fmt_num(0.1) == "0.10000000000000001"
    assert fmt_num(np.float64(1e-9)) == "1.0000000000000001e-09"
    assert fmt_num(7) == "7"
    assert fmt_num(True) == "True"
    assert fmt_num("Interior") == "Interior"


def test_metadata_lines(cheap_params):
    run = _run(cheap_params, method="both", sim=SimConfig(seed=42, n_paths=10), preset="fig3", note="n")
    lines = ReportExporter(run).metadata({"b": 30.0})
    assert lines[0] == "# command=ruin"
    assert lines[1] == "# preset=fig3"
    assert lines[2] == "# note=n"
    assert lines[3].startswith("# params: mu=2 lambda=6 ")
    assert lines[3].endswith(" epsilon=0.10000000000000001 seed=42")
    assert "# mc: paths=10 scheme=bridge dt=auto" in lines
    assert lines[-1] == "# b=30"


def test_pde_only_still_records_seed(cheap_params):
    lines = ReportExporter(_run(cheap_params, sim=SimConfig(seed=99))).metadata()
    params_line = next(line for line in lines if line.startswith("# params:"))
    assert params_line.endswith(" seed=99")
    assert not any(line.startswith("# mc:") for line in lines)


def test_csv_layout(cheap_params):
    frame = pd.DataFrame({"x": [0.0, 0.5], "psi": [1.0, 1.0 / 3.0]})
    text = ReportExporter(_run(cheap_params)).to_csv(frame)
    body = [line for line in text.split("\n") if line and not line.startswith("#")]
    assert body == ["x,psi", "0,1", "0.5,0.33333333333333331"]
    assert text.endswith("\n")


def test_human_layout(cheap_params):
    frame = pd.DataFrame({"x": [0.0, 0.5], "psi": [1.0, 1.0 / 3.0]})
    text = ReportExporter(_run(cheap_params, fmt="human")).render(frame)
    assert "0.3333333333" in text
    assert "0.33333333333333331" not in text


def test_multiple_tables_to_stdout(cheap_params, capsys):
    written = ReportExporter(_run(cheap_params)).write_tables({"a": "A\n", "b": "B\n"})
    assert written == []
    assert capsys.readouterr().out == "A\n\nB\n"


def test_single_table_to_file(cheap_params, tmp_path):
    out = tmp_path / "sub" / "table.csv"
    written = ReportExporter(_run(cheap_params, out=str(out))).write_tables({"ruin": "x\n1\n"})
    assert written == [str(out)]
    assert out.read_bytes() == b"x\n1\n"
