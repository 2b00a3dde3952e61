import json

import pytest

from cogito.cli import format_ranking, load_scenario, main
from cogito.errors import UnknownSentenceId
from cogito.matching import Ranking
from cogito.model import Sentence, Source

from conftest import BUNDLE_DIR, KEYS_TOP_SENTENCE, SCENARIO_DIR, TABLE_SCORES, TABLE_SENTENCES


def table_sentences():
    return [
        Sentence(id=str(i + 1), text=t, source=Source.FIXTURE, timestamp=0)
        for i, t in enumerate(TABLE_SENTENCES)
    ]


class TestFormatRanking:
    def test_reference_table_lines_to_the_character(self):
        sentences = table_sentences()
        entries = sorted(
            ((s.id, score) for s, score in zip(sentences, TABLE_SCORES)),
            key=lambda pair: -pair[1],
        )
        text = format_ranking(Ranking(entries=tuple(entries)), sentences)
        lines = text.splitlines()
        assert lines[0] == "a bottle of water sitting on a table - Similarity: 0.0395"
        assert lines[-1] == f"{KEYS_TOP_SENTENCE} - Similarity: 0.4531 *"
        assert sum(line.endswith(" *") for line in lines) == 1

    def test_single_entry(self):
        sentence = Sentence(id="1", text="only one", source=Source.FIXTURE, timestamp=0)
        text = format_ranking(Ranking(entries=(("1", 1.0),)), [sentence])
        assert text == "only one - Similarity: 1.0000 *"

    def test_unknown_id(self):
        sentence = Sentence(id="1", text="only one", source=Source.FIXTURE, timestamp=0)
        with pytest.raises(UnknownSentenceId):
            format_ranking(Ranking(entries=(("2", 0.5),)), [sentence])


@pytest.fixture
def fixture_env(monkeypatch):
    monkeypatch.setenv("COGITO_FIXTURE_DIR", str(BUNDLE_DIR))


class TestRun:
    def test_keys_scenario_fixture_mode(self, tmp_path, fixture_env):
        out = tmp_path / "out"
        code = main([
            "--scenario", str(SCENARIO_DIR / "keys.json"),
            "--backend", "fixture",
            "--out-dir", str(out),
        ])
        assert code == 0
        assert (out / "trace.json").exists()
        assert (out / "ranking.txt").exists()
        for name in ("cycle0_action0.pgm", "cycle0_action1.pgm",
                     "cycle0_action2.pgm", "cycle1_action0.pgm"):
            assert (out / name).exists()
        ranking = (out / "ranking.txt").read_text()
        assert f"{KEYS_TOP_SENTENCE} - Similarity: 0.4531 *" in ranking

    def test_double_run_is_byte_identical(self, tmp_path, fixture_env):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main([
                "--scenario", str(SCENARIO_DIR / "keys.json"),
                "--backend", "fixture",
                "--out-dir", str(out),
            ]) == 0
            outs.append(out)
        files = sorted(p.name for p in outs[0].iterdir())
        assert files == sorted(p.name for p in outs[1].iterdir())
        for name in files:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name

    def test_validation_failure_exits_2_and_names_field(self, tmp_path, capsys):
        scenario = json.loads((SCENARIO_DIR / "keys.json").read_text())
        scenario["needs"][0]["text"] = ""
        scenario["fixture_path"] = str(SCENARIO_DIR / "contexts_desk.txt")
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(scenario))
        code = main(["--scenario", str(bad), "--out-dir", str(tmp_path / "out")])
        assert code == 2
        assert "needs[0].text" in capsys.readouterr().err

    def test_missing_scenario_exits_2(self, tmp_path, capsys):
        code = main(["--scenario", str(tmp_path / "nope.json")])
        assert code == 2

    def test_missing_context_fixture_exits_3_with_marker(self, tmp_path, capsys):
        scenario = json.loads((SCENARIO_DIR / "keys.json").read_text())
        scenario["fixture_path"] = "does_not_exist.txt"
        bad = tmp_path / "dangling.json"
        bad.write_text(json.dumps(scenario))
        out = tmp_path / "out"
        code = main(["--scenario", str(bad), "--out-dir", str(out)])
        assert code == 3
        trace = json.loads((out / "trace.json").read_text())
        assert "FileNotFoundError" in trace["error"]

    def test_unreachable_remote_exits_3_with_partial_trace(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("COGITO_BACKEND_URL", "http://127.0.0.1:9")
        monkeypatch.setenv("COGITO_TIMEOUT_MS", "300")
        out = tmp_path / "out"
        code = main([
            "--scenario", str(SCENARIO_DIR / "keys.json"),
            "--backend", "remote",
            "--out-dir", str(out),
        ])
        assert code == 3
        trace = json.loads((out / "trace.json").read_text())
        assert trace["cycles"] == []
        assert "BackendUnavailable" in trace["error"]

    def test_overrides_apply(self, tmp_path, fixture_env):
        out = tmp_path / "out"
        code = main([
            "--scenario", str(SCENARIO_DIR / "keys.json"),
            "--backend", "fixture",
            "--out-dir", str(out),
            "--max-cycles", "0",
        ])
        assert code == 0
        trace = json.loads((out / "trace.json").read_text())
        assert trace["cycles"] == []

    def test_every_trace_reference_exists(self, tmp_path, fixture_env):
        out = tmp_path / "out"
        assert main([
            "--scenario", str(SCENARIO_DIR / "whatif.json"),
            "--backend", "fixture",
            "--out-dir", str(out),
        ]) == 0
        trace = json.loads((out / "trace.json").read_text())
        for cycle in trace["cycles"]:
            for j in range(len(cycle["images"])):
                assert (out / f"cycle{cycle['index']}_action{j}.pgm").exists()


class TestScenarioLoading:
    def test_relative_fixture_path_resolves_against_scenario_dir(self):
        scenario = load_scenario(SCENARIO_DIR / "keys.json")
        assert scenario.fixture_path.endswith("contexts_desk.txt")
        from pathlib import Path

        assert Path(scenario.fixture_path).exists()
