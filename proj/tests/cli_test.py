"""End-to-end checks of the wbplan command-line tool."""

import copy
import csv
import io
import json
import os
import subprocess
import sys
import tempfile
import unittest
import xml.dom.minidom

BIN = None

GOAL_Q = [0.3, 0.4, -0.5, 0.2, 0.6, 0.1]


def run(*args, ok=(0,)):
    p = subprocess.run([BIN, *args], capture_output=True, text=True, timeout=600)
    if ok is not None and p.returncode not in ok:
        raise AssertionError(f"{args[0]} exited {p.returncode}\n{p.stderr}")
    return p


def parked(x, y, theta, q):
    # one segment holding a constant whole-body state
    coeffs = [[[v, 0, 0, 0, 0, 0] for v in [0.0, theta, *q]]]
    return {"x0": x, "y0": y, "durations": [2.0], "coeffs": coeffs}


class Cli(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = cls.tmp.name
        cls.room = cls.write("room.json", {"room": [0, 0, 10, 6], "obstacles": []})
        cls.blocked = cls.write("blocked.json", {"room": [0, 0, 10, 6], "obstacles": [
            {"center": [7, 3, 1.0], "half_extents": [0.7, 0.7, 1.0], "kind": "cuboid"}]})

        # goal pose from forward kinematics of a parked goal state
        park = cls.write("park.json", parked(7.0, 3.0, 0.0, GOAL_Q))
        ee = json.loads(run("validate", "--trajectory", park, "--scenario", cls.room).stdout)["end_effector"]
        cls.request = {"start": {"base": [2.0, 3.0, 0.0], "q": [0.0] * 6},
                       "goal": {"position": ee["position"], "rotation": ee["rotation"]}, "seed": 7}
        cls.req = cls.write("request.json", cls.request)

        cls.report = os.path.join(cls.dir, "report.json")
        cls.svg = os.path.join(cls.dir, "plan.svg")
        cls.traj = os.path.join(cls.dir, "traj.json")
        cls.csv = os.path.join(cls.dir, "traj.csv")
        cls.plan = run("plan", "--scenario", cls.room, "--request", cls.req, "--out", cls.report, "--svg", cls.svg,
                       "--trajectory-out", cls.traj, "--csv", cls.csv, ok=None)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    @classmethod
    def write(cls, name, obj):
        path = os.path.join(cls.dir, name)
        with open(path, "w") as f:
            f.write(obj if isinstance(obj, str) else json.dumps(obj))
        return path

    def test_plan_empty_room_succeeds(self):
        self.assertEqual(self.plan.returncode, 0, self.plan.stderr)
        with open(self.report) as f:
            rep = json.load(f)
        self.assertEqual(rep["status"], "success")
        self.assertIn("trajectory", rep)

    def test_svg_is_well_formed(self):
        doc = xml.dom.minidom.parse(self.svg)
        self.assertEqual(doc.documentElement.tagName, "svg")
        ids = {e.getAttribute("id") for e in doc.getElementsByTagName("g")}
        self.assertTrue({"esdf", "candidates", "solution"} <= ids)

    def test_trajectory_csv_parses(self):
        with open(self.csv) as f:
            rows = list(csv.reader(f))
        self.assertGreater(len(rows), 10)
        self.assertTrue(all(len(r) == len(rows[0]) for r in rows))
        float(rows[-1][0])

    def test_validate_round_trip(self):
        for src in (self.traj, self.report):
            out = json.loads(run("validate", "--trajectory", src, "--scenario", self.room).stdout)
            self.assertTrue(out["pass"])
            self.assertEqual(len(out["families"]), 6)

    def test_corrupted_coefficient_fails_validation(self):
        with open(self.traj) as f:
            tr = json.load(f)
        bad = copy.deepcopy(tr)
        bad["coeffs"][0][0][1] += 50.0  # base speed far beyond its limit
        p = run("validate", "--trajectory", self.write("bad.json", bad), "--scenario", self.room, ok=(1,))
        fam = json.loads(p.stdout)["families"]
        self.assertFalse(all(v["pass"] for v in fam.values()))

    def test_goal_inside_obstacle_exits_3(self):
        p = run("plan", "--scenario", self.blocked, "--request", self.req, ok=(3,))
        self.assertNotEqual(json.loads(p.stdout)["status"], "success")

    def test_malformed_input_exits_4(self):
        broken = self.write("broken.json", '{"room": [0, 0, 10, 6],\n "obstacles": [}\n')
        p = run("validate", "--trajectory", self.traj, "--scenario", broken, ok=(4,))
        self.assertIn("line 2", p.stderr)
        req = copy.deepcopy(self.request)
        req["start"]["base"] = [1.0, 2.0]
        p = run("plan", "--scenario", self.room, "--request", self.write("short.json", req), ok=(4,))
        self.assertIn("start.base", p.stderr)
        run("plan", "--scenario", self.room, "--request", self.req, "--jobs", "x", ok=(4,))

    def test_gen_scenario(self):
        a = json.loads(run("gen-scenario", "--seed", "4").stdout)
        b = json.loads(run("gen-scenario", "--seed", "4").stdout)
        self.assertEqual(a, b)
        self.assertEqual(a["room"], [0, 0, 20, 10])
        self.assertGreater(len(a["obstacles"]), 20)

    def test_benchmark_single_empty_trial(self):
        spec = self.write("spec.json", {"intervals": [[3, 8]], "trials": 1, "seed": 5,
                                        "scenario": {"room_width": 12, "room_height": 8,
                                                     "desk_grids": 0, "cuboids": 0}})
        outs = []
        for jobs in ("1", "2"):
            csv_path = os.path.join(self.dir, f"bench{jobs}.csv")
            p = run("benchmark", "--spec", spec, "--jobs", jobs, "--csv", csv_path)
            summary = json.loads(p.stdout)
            with open(csv_path, "rb") as f:
                outs.append(f.read())
        rows = list(csv.DictReader(io.StringIO(outs[0].decode())))
        self.assertEqual(len(rows), 1)
        self.assertEqual(outs[0], outs[1])
        rate = summary["intervals"][0]["success_rate"]
        self.assertIn(rate, (0, 100))


if __name__ == "__main__":
    BIN = sys.argv.pop(1)
    unittest.main()
