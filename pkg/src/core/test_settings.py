import io
import json
import logging
from pathlib import Path
import tempfile
import unittest

from src.core import settings


class SettingsTests(unittest.TestCase):
    def test_as_bool_accepts_json_and_cli_spellings(self):
        self.assertTrue(settings.as_bool("Yes"))
        self.assertTrue(settings.as_bool(1))
        self.assertFalse(settings.as_bool("off", default=True))
        self.assertTrue(settings.as_bool(None, default=True))

    def test_merge_keeps_untouched_nested_keys(self):
        merged = settings._merge_settings(
            {"grid": {"nodes": 200, "spacing": "mixed"}, "solver": {"tol": 1e-6}},
            {"grid": {"nodes": 64}},
        )
        self.assertEqual(merged["grid"], {"nodes": 64, "spacing": "mixed"})
        self.assertEqual(merged["solver"], {"tol": 1e-6})

    def test_load_settings_reads_defaults_and_user_file(self):
        defaults = settings.load_settings()
        self.assertEqual(defaults["spectral"]["lambda_panels"], 24)
        with tempfile.TemporaryDirectory() as raw_dir:
            path = Path(raw_dir) / "user.json"
            path.write_text(json.dumps({"solver": {"max_iter": 7}}), encoding="utf-8")
            merged = settings.load_settings(path)
            self.assertEqual(merged["solver"]["max_iter"], 7)
            self.assertEqual(merged["solver"]["damping"], defaults["solver"]["damping"])

            broken = Path(raw_dir) / "broken.json"
            broken.write_text("{not json", encoding="utf-8")
            self.assertEqual(settings.load_settings(broken), defaults)

    def test_section_tolerates_malformed_entries(self):
        self.assertEqual(settings.section({"grid": 3}, "grid"), {})
        self.assertEqual(settings.section({}, "grid"), {})

    def test_worker_count_prefers_environment_then_settings(self):
        env = {settings.THREADS_ENV: "3"}
        configured = {"general": {"threads": 2}}
        self.assertEqual(settings.worker_count(configured, environ=env, cpu_count=8), 3)
        self.assertEqual(settings.worker_count(configured, environ={}, cpu_count=8), 2)
        self.assertEqual(settings.worker_count({}, environ={}, cpu_count=8), 8)
        self.assertEqual(settings.worker_count(configured, environ={settings.THREADS_ENV: "99"}, cpu_count=4), 4)
        self.assertEqual(
            settings.worker_count({"general": {"threads": "many"}}, environ={}, cpu_count=5), 5
        )

    def test_configure_logging_installs_one_handler(self):
        stream = io.StringIO()
        root = logging.getLogger()
        previous = list(root.handlers), root.level
        try:
            settings.configure_logging(debug=True, stream=stream)
            settings.configure_logging(debug=True, stream=stream)
            self.assertEqual(len(root.handlers), 1)
            logging.getLogger("src.core.test").debug("grid ready")
            self.assertIn("DEBUG", stream.getvalue())
            self.assertIn("grid ready", stream.getvalue())
        finally:
            for handler in list(root.handlers):
                root.removeHandler(handler)
            for handler in previous[0]:
                root.addHandler(handler)
            root.setLevel(previous[1])


if __name__ == "__main__":
    unittest.main()
