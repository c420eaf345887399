// Copyright 2026 The pdflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pdflow/experiment.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <thread>

#include "text_util.hpp"

namespace pdflow {

using internal::FormatDouble;
using internal::Trim;

namespace {

[[noreturn]] void ConfigFail(int line, const std::string& msg) {
  Fail(ErrorCode::kConfig, "config line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> Words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double ParseReal(const std::string& text, int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || !std::isfinite(v)) {
    ConfigFail(line, "expected a finite real, got '" + text + "'");
  }
  return v;
}

long long ParseInt(const std::string& text, int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (text.empty() || end != begin + text.size() || errno != 0) {
    ConfigFail(line, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> ParseList(const std::string& value, int line) {
  std::vector<double> out;
  for (const std::string& w : Words(value)) out.push_back(ParseReal(w, line));
  return out;
}

double ParseScalar(const std::string& value, int line) {
  const auto words = Words(value);
  if (words.size() != 1) ConfigFail(line, "expected one value, got '" + value + "'");
  return ParseReal(words[0], line);
}

bool ParseBool(const std::string& value, int line) {
  if (value == "true") return true;
  if (value == "false") return false;
  ConfigFail(line, "expected true or false, got '" + value + "'");
}

VectorSpec ParseVectorSpec(const std::string& value, int line) {
  const auto words = Words(value);
  VectorSpec spec;
  if (!words.empty() && words[0] == "fill") {
    if (words.size() != 2) ConfigFail(line, "expected 'fill <value>'");
    spec.fill = true;
    spec.fill_value = ParseReal(words[1], line);
    return spec;
  }
  if (words.empty()) ConfigFail(line, "empty vector");
  spec.fill = false;
  spec.fill_value = 0.0;
  for (const std::string& w : words) spec.values.push_back(ParseReal(w, line));
  return spec;
}

std::string FormatList(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += FormatDouble(values[i]);
  }
  return out;
}

std::string FormatVectorSpec(const VectorSpec& spec) {
  if (spec.fill) return "fill " + FormatDouble(spec.fill_value);
  return FormatList(spec.values);
}

bool IsSafeName(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '-' || ch == '.';
    if (!ok) return false;
  }
  return true;
}

std::string ShortDouble(double v) { return FormatDouble(v, 6); }

std::string Join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += (ch == '\n') ? ' ' : ch;
  }
  return out + "\"";
}

}  // namespace

Vec VectorSpec::Resolve(Eigen::Index size, const char* what) const {
  if (fill) return Vec::Constant(size, fill_value);
  if (static_cast<Eigen::Index>(values.size()) != size) {
    Fail(ErrorCode::kConfig, std::string("initial ") + what + ": expected " +
                                 std::to_string(size) + " entries, got " +
                                 std::to_string(values.size()));
  }
  return Eigen::Map<const Vec>(values.data(), size);
}

std::string SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kSigma: return "sigma";
    case SweepAxis::kS: return "s";
    case SweepAxis::kGamma: return "gamma";
  }
  return "none";
}

ExperimentConfig ParseConfig(std::istream& in) {
  ExperimentConfig cfg;  // every key is optional
  std::string section;
  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') ConfigFail(line_no, "unterminated section header");
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> kSections = {"experiment", "problem",    "parameters",
                                                      "mass",       "initial",    "integrator",
                                                      "sweep"};
      if (!kSections.count(section)) ConfigFail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) ConfigFail(line_no, "expected key = value");
    const std::string key(Trim(line.substr(0, eq)));
    const std::string value(Trim(line.substr(eq + 1)));
    if (section.empty()) ConfigFail(line_no, "key '" + key + "' outside any section");
    if (!seen.insert(section + "." + key).second) {
      ConfigFail(line_no, "duplicate key " + section + "." + key);
    }
    auto unknown = [&] { ConfigFail(line_no, "unknown key '" + key + "' in [" + section + "]"); };

    if (section == "experiment") {
      if (key == "name") {
        if (!IsSafeName(value)) ConfigFail(line_no, "name must match [A-Za-z0-9_.-]+");
        cfg.name = value;
      } else if (key == "horizon") {
        cfg.horizon = ParseScalar(value, line_no);
      } else if (key == "output_dir") {
        if (value.empty()) ConfigFail(line_no, "empty output_dir");
        cfg.output_dir = value;
      } else if (key == "dump_state") {
        cfg.dump_state = ParseBool(value, line_no);
      } else if (key == "threads") {
        cfg.threads = static_cast<int>(ParseInt(value, line_no));
      } else if (key == "oscillation_from") {
        cfg.oscillation_from = ParseScalar(value, line_no);
      } else {
        unknown();
      }
    } else if (section == "problem") {
      if (key == "kind") {
        if (value == "random_qp") cfg.problem.kind = ProblemSpec::Kind::kRandomQp;
        else if (value == "toy") cfg.problem.kind = ProblemSpec::Kind::kToy;
        else if (value == "file") cfg.problem.kind = ProblemSpec::Kind::kFile;
        else ConfigFail(line_no, "problem kind must be random_qp, toy or file");
      } else if (key == "seed") {
        const long long seed = ParseInt(value, line_no);
        if (seed < 0) ConfigFail(line_no, "seed must be >= 0");
        cfg.problem.seed = static_cast<std::uint64_t>(seed);
      } else if (key == "dims") {
        const auto words = Words(value);
        if (words.size() != 2) ConfigFail(line_no, "dims needs two integers: m n");
        cfg.problem.m = static_cast<int>(ParseInt(words[0], line_no));
        cfg.problem.n = static_cast<int>(ParseInt(words[1], line_no));
      } else if (key == "coefficients") {
        cfg.problem.coefficients = ParseList(value, line_no);
        if (cfg.problem.coefficients.size() != 3) ConfigFail(line_no, "coefficients needs 3 reals");
      } else if (key == "path") {
        cfg.problem.path = value;
      } else {
        unknown();
      }
    } else if (section == "parameters") {
      const double v = ParseScalar(value, line_no);
      if (key == "alpha") cfg.alpha = v;
      else if (key == "q") cfg.q = v;
      else if (key == "s") cfg.s = v;
      else if (key == "gamma") cfg.gamma = v;
      else if (key == "c") cfg.c = v;
      else if (key == "p") cfg.p = v;
      else if (key == "t0") cfg.t0 = v;
      else unknown();
    } else if (section == "mass") {
      const double v = ParseScalar(value, line_no);
      if (key == "kappa") cfg.mass_kappa = v;
      else if (key == "sigma") cfg.mass_sigma = v;
      else unknown();
    } else if (section == "initial") {
      if (key == "x") cfg.x0 = ParseVectorSpec(value, line_no);
      else if (key == "v") cfg.v0 = ParseVectorSpec(value, line_no);
      else if (key == "lambda") cfg.lambda0 = ParseVectorSpec(value, line_no);
      else unknown();
    } else if (section == "integrator") {
      IntegratorConfig& ic = cfg.integrator;
      if (key == "max_steps") ic.max_steps = static_cast<long>(ParseInt(value, line_no));
      else if (key == "sample_count") ic.sample_count = static_cast<int>(ParseInt(value, line_no));
      else if (key == "rel_tol") ic.rel_tol = ParseScalar(value, line_no);
      else if (key == "abs_tol") ic.abs_tol = ParseScalar(value, line_no);
      else if (key == "max_step_factor") ic.max_step_factor = ParseScalar(value, line_no);
      else if (key == "initial_step") ic.initial_step = ParseScalar(value, line_no);
      else unknown();
    } else if (section == "sweep") {
      if (key == "axis") {
        if (value == "none") cfg.sweep = SweepAxis::kNone;
        else if (value == "sigma") cfg.sweep = SweepAxis::kSigma;
        else if (value == "s") cfg.sweep = SweepAxis::kS;
        else if (value == "gamma") cfg.sweep = SweepAxis::kGamma;
        else ConfigFail(line_no, "sweep axis must be none, sigma, s or gamma");
      } else if (key == "values") {
        cfg.sweep_values = ParseList(value, line_no);
      } else {
        unknown();
      }
    }
  }
  if (in.bad()) Fail(ErrorCode::kIo, "config: read error");
  ValidateConfig(cfg);
  return cfg;
}

ExperimentConfig ParseConfigString(const std::string& text) {
  std::istringstream in(text);
  return ParseConfig(in);
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "config: cannot open '" + path + "'");
  return ParseConfig(in);
}

std::string FormatConfig(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "name = " << c.name << "\n"
      << "horizon = " << FormatDouble(c.horizon) << "\n"
      << "output_dir = " << c.output_dir << "\n"
      << "dump_state = " << (c.dump_state ? "true" : "false") << "\n"
      << "threads = " << c.threads << "\n"
      << "oscillation_from = " << FormatDouble(c.oscillation_from) << "\n\n";
  out << "[problem]\n";
  switch (c.problem.kind) {
    case ProblemSpec::Kind::kRandomQp: out << "kind = random_qp\n"; break;
    case ProblemSpec::Kind::kToy: out << "kind = toy\n"; break;
    case ProblemSpec::Kind::kFile: out << "kind = file\n"; break;
  }
  out << "seed = " << c.problem.seed << "\n"
      << "dims = " << c.problem.m << " " << c.problem.n << "\n"
      << "coefficients = " << FormatList(c.problem.coefficients) << "\n";
  if (!c.problem.path.empty()) out << "path = " << c.problem.path << "\n";
  out << "\n[parameters]\n"
      << "alpha = " << FormatDouble(c.alpha) << "\n"
      << "q = " << FormatDouble(c.q) << "\n"
      << "s = " << FormatDouble(c.s) << "\n"
      << "gamma = " << FormatDouble(c.gamma) << "\n"
      << "c = " << FormatDouble(c.c) << "\n"
      << "p = " << FormatDouble(c.p) << "\n"
      << "t0 = " << FormatDouble(c.t0) << "\n\n";
  out << "[mass]\n"
      << "kappa = " << FormatDouble(c.mass_kappa) << "\n"
      << "sigma = " << FormatDouble(c.mass_sigma) << "\n\n";
  out << "[initial]\n"
      << "x = " << FormatVectorSpec(c.x0) << "\n"
      << "v = " << FormatVectorSpec(c.v0) << "\n"
      << "lambda = " << FormatVectorSpec(c.lambda0) << "\n\n";
  const IntegratorConfig& ic = c.integrator;
  out << "[integrator]\n"
      << "rel_tol = " << FormatDouble(ic.rel_tol) << "\n"
      << "abs_tol = " << FormatDouble(ic.abs_tol) << "\n"
      << "max_step_factor = " << FormatDouble(ic.max_step_factor) << "\n"
      << "initial_step = " << FormatDouble(ic.initial_step) << "\n"
      << "max_steps = " << ic.max_steps << "\n"
      << "sample_count = " << ic.sample_count << "\n\n";
  out << "[sweep]\n"
      << "axis = " << SweepAxisName(c.sweep) << "\n";
  if (!c.sweep_values.empty()) out << "values = " << FormatList(c.sweep_values) << "\n";
  return out.str();
}

void ValidateConfig(const ExperimentConfig& c) {
  if (!IsSafeName(c.name)) Fail(ErrorCode::kConfig, "config: name must match [A-Za-z0-9_.-]+");
  if (c.output_dir.empty() || c.output_dir.find('\n') != std::string::npos) {
    Fail(ErrorCode::kConfig, "config: bad output_dir");
  }
  if (c.threads < 0) Fail(ErrorCode::kConfig, "config: threads must be >= 0");
  if (!(c.oscillation_from > 0.0)) Fail(ErrorCode::kConfig, "config: oscillation_from must be > 0");
  if (!(c.horizon > c.t0)) Fail(ErrorCode::kConfig, "config: horizon must exceed t0");
  switch (c.problem.kind) {
    case ProblemSpec::Kind::kRandomQp:
      if (c.problem.m < 1 || c.problem.n < 1) Fail(ErrorCode::kConfig, "config: dims must be >= 1");
      break;
    case ProblemSpec::Kind::kToy:
      if (c.problem.coefficients.size() != 3) {
        Fail(ErrorCode::kConfig, "config: toy problem needs 3 coefficients");
      }
      break;
    case ProblemSpec::Kind::kFile:
      if (c.problem.path.empty()) Fail(ErrorCode::kConfig, "config: file problem needs a path");
      break;
  }
  if (c.sweep == SweepAxis::kNone && !c.sweep_values.empty()) {
    Fail(ErrorCode::kConfig, "config: sweep values given but axis is none");
  }
  if (c.sweep != SweepAxis::kNone && c.sweep_values.empty()) {
    Fail(ErrorCode::kConfig, "config: sweep axis " + SweepAxisName(c.sweep) + " has no values");
  }
  c.integrator.Validate();
  // Parameter ranges, checked per member so that sweep values are covered.
  for (const SweepMember& m : ExpandSweep(c)) {
    BuildParameters(m.config);
    BuildMass(m.config);
  }
}

std::vector<std::string> PresetNames() { return {"example51", "example52", "example52_hessian"}; }

ExperimentConfig Preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "example51") {
    c.name = name;
    c.problem.kind = ProblemSpec::Kind::kRandomQp;
    c.problem.seed = 42;
    c.problem.m = 5;
    c.problem.n = 10;
    c.alpha = 1.1;
    c.q = 0.06;
    c.p = 0.9;
    c.s = 0.7;
    c.c = 0.01;
    c.gamma = 2.0;
    c.mass_kappa = 1.0;
    c.mass_sigma = 0.0;
    c.x0 = c.v0 = c.lambda0 = VectorSpec{};
    c.sweep = SweepAxis::kSigma;
    c.sweep_values = {0.0, 0.1, 0.4, 0.7};
    return c;
  }
  if (name == "example52" || name == "example52_hessian") {
    const bool hessian = name == "example52_hessian";
    c.name = name;
    c.problem.kind = ProblemSpec::Kind::kToy;
    c.problem.coefficients = hessian ? std::vector<double>{10.0, 20.0, 10.0}
                                     : std::vector<double>{1.0, 2.0, 1.0};
    c.alpha = 3.0;
    c.q = 0.1;
    c.p = 0.1;
    c.c = 5.0;
    c.gamma = 1.0;
    c.s = 0.1;
    c.mass_kappa = 1.0;
    c.mass_sigma = 0.15;
    c.x0 = VectorSpec{false, 0.0, {1.0, 1.0, -1.0}};
    c.v0 = VectorSpec{false, 0.0, {-1.0, -1.0, 1.0}};
    c.lambda0 = VectorSpec{false, 0.0, {1.0}};
    // The toy solution decays far below 1e-10; track it down to the
    // metric floor instead of stopping at the default absolute tolerance.
    c.integrator.abs_tol = 1e-16;
    if (hessian) {
      c.dump_state = true;
      c.sweep = SweepAxis::kGamma;
      c.sweep_values = {0.0, 1.0};
    } else {
      c.sweep = SweepAxis::kS;
      c.sweep_values = {0.1, 0.3, 0.5, 0.7};
    }
    return c;
  }
  Fail(ErrorCode::kConfig,
       "unknown preset '" + name + "' (known: example51, example52, example52_hessian)");
}

std::vector<SweepMember> ExpandSweep(const ExperimentConfig& config) {
  std::vector<SweepMember> out;
  if (config.sweep == SweepAxis::kNone) {
    out.push_back({config.name, 0.0, config});
    return out;
  }
  std::set<std::string> labels;
  for (double v : config.sweep_values) {
    SweepMember m;
    m.value = v;
    m.config = config;
    m.config.sweep = SweepAxis::kNone;
    m.config.sweep_values.clear();
    switch (config.sweep) {
      case SweepAxis::kSigma: m.config.mass_sigma = v; break;
      case SweepAxis::kS: m.config.s = v; break;
      case SweepAxis::kGamma: m.config.gamma = v; break;
      case SweepAxis::kNone: break;
    }
    m.label = config.name + "_" + SweepAxisName(config.sweep) + ShortDouble(v);
    m.config.name = m.label;
    if (!labels.insert(m.label).second) {
      Fail(ErrorCode::kConfig, "config: sweep values collide in label " + m.label);
    }
    out.push_back(std::move(m));
  }
  return out;
}

Problem BuildProblem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemSpec::Kind::kRandomQp:
      return MakeRandomQp(spec.seed, spec.m, spec.n);
    case ProblemSpec::Kind::kToy:
      if (spec.coefficients.size() != 3) {
        Fail(ErrorCode::kConfig, "toy problem needs 3 coefficients");
      }
      return MakeToyProblem(spec.coefficients[0], spec.coefficients[1], spec.coefficients[2]);
    case ProblemSpec::Kind::kFile: {
      std::ifstream in(spec.path);
      if (!in) Fail(ErrorCode::kIo, "problem: cannot open '" + spec.path + "'");
      return ReadProblemText(in);
    }
  }
  Fail(ErrorCode::kConfig, "problem: unknown kind");
}

ParameterSet BuildParameters(const ExperimentConfig& c) {
  return ParameterSet::Make(c.alpha, c.q, c.s, c.gamma, c.c, c.p, c.t0);
}

MassFunction BuildMass(const ExperimentConfig& c) {
  return MassFunction::PowerLaw(c.mass_kappa, c.mass_sigma);
}

TrajectoryState BuildInitialState(const ExperimentConfig& c, const Problem& prob) {
  TrajectoryState s;
  s.t = c.t0;
  s.x = c.x0.Resolve(prob.dim_x(), "x");
  s.v = c.v0.Resolve(prob.dim_x(), "v");
  s.lambda = c.lambda0.Resolve(prob.dim_y(), "lambda");
  return s;
}

std::string RunStatusName(RunStatus status) {
  switch (status) {
    case RunStatus::kOk: return "ok";
    case RunStatus::kDiverged: return "diverged";
    case RunStatus::kTruncated: return "truncated";
    case RunStatus::kFailed: return "failed";
    case RunStatus::kNotRun: return "not_run";
  }
  return "failed";
}

namespace {

RunSummary ClassifyMember(const SweepMember& member) {
  RunSummary sum;
  sum.label = member.label;
  sum.sweep_value = member.value;
  const ParameterSet params = BuildParameters(member.config);
  const MassFunction mass = BuildMass(member.config);
  sum.regime = ValidateAndClassify(params, mass);
  sum.warnings = sum.regime.warnings;
  return sum;
}

}  // namespace

std::vector<RunSummary> CheckExperiment(const ExperimentConfig& config) {
  ValidateConfig(config);
  std::vector<RunSummary> out;
  for (const SweepMember& m : ExpandSweep(config)) {
    RunSummary sum = ClassifyMember(m);
    sum.axis = config.sweep;
    // Problem data must load and match the initial state even when nothing
    // is integrated.
    const Problem prob = BuildProblem(m.config.problem);
    BuildInitialState(m.config, prob);
    CheckTimeWindow(BuildParameters(m.config), m.config.horizon);
    out.push_back(std::move(sum));
  }
  return out;
}

RunOutput RunMember(const SweepMember& member) {
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  RunSummary& sum = out.summary;
  const ExperimentConfig& cfg = member.config;
  try {
    sum = ClassifyMember(member);
    const Problem prob = BuildProblem(cfg.problem);
    const ParameterSet params = BuildParameters(cfg);
    const MassFunction mass = BuildMass(cfg);
    const TrajectoryState state0 = BuildInitialState(cfg, prob);
    CheckTimeWindow(params, cfg.horizon);
    const PrimalDualFlow flow(prob, params, mass);

    sum.status = RunStatus::kOk;
    try {
      out.trajectory = Integrate(flow, state0, cfg.horizon, cfg.integrator);
    } catch (const TrajectoryError& e) {
      sum.status = e.code() == ErrorCode::kTruncated ? RunStatus::kTruncated : RunStatus::kDiverged;
      sum.message = e.what();
      out.trajectory = e.partial;
    }
    sum.accepted_steps = out.trajectory.stats.accepted;
    sum.rejected_steps = out.trajectory.stats.rejected;

    if (!out.trajectory.samples.empty()) {
      std::vector<double> times;
      times.reserve(out.trajectory.samples.size());
      for (const auto& s : out.trajectory.samples) times.push_back(s.t);
      const MinNormSolution min_norm = ComputeMinNormSolution(prob);
      const auto path = SaddlePath(prob, params.reg, times);
      out.metrics = ComputeMetrics(prob, params, mass, out.trajectory, path, min_norm);
      sum.terminal = out.metrics.back();
      sum.has_terminal = true;
    }

    if (sum.status == RunStatus::kOk) {
      const double t_hi = cfg.horizon;
      const double t_lo = std::max(cfg.t0, cfg.horizon / 100.0);
      for (std::string_view metric : kRateMetrics) {
        RateResult rr;
        rr.metric = std::string(metric);
        try {
          rr.estimate = FitRate(out.metrics, metric, t_lo, t_hi, sum.regime);
          rr.ok = true;
        } catch (const Error& e) {
          rr.error = e.what();
        }
        sum.rates.push_back(std::move(rr));
      }
      sum.oscillations.push_back(
          {"objective", MeasureOscillation(out.trajectory, ComponentSelector::Objective(), &prob,
                                           cfg.oscillation_from)});
      if (prob.dim_x() <= 16) {
        for (Eigen::Index i = 0; i < prob.dim_x(); ++i) {
          sum.oscillations.push_back(
              {"x" + std::to_string(i + 1),
               MeasureOscillation(out.trajectory, ComponentSelector::Primal(i), &prob,
                                  cfg.oscillation_from)});
        }
      }
    }
  } catch (const Error& e) {
    sum.label = member.label;
    sum.sweep_value = member.value;
    sum.status = RunStatus::kFailed;
    sum.message = e.what();
  }
  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<std::string> CsvHeader(Eigen::Index dim_x, Eigen::Index dim_y, bool with_state) {
  std::vector<std::string> cols(kMetricColumns.begin(), kMetricColumns.end());
  if (with_state) {
    for (Eigen::Index i = 1; i <= dim_x; ++i) cols.push_back("x" + std::to_string(i));
    for (Eigen::Index i = 1; i <= dim_x; ++i) cols.push_back("v" + std::to_string(i));
    for (Eigen::Index j = 1; j <= dim_y; ++j) cols.push_back("lambda" + std::to_string(j));
  }
  return cols;
}

void WriteMetricsCsv(std::ostream& out, const std::vector<MetricRow>& rows,
                     const Trajectory* state) {
  Eigen::Index nx = 0, ny = 0;
  if (state) {
    if (state->samples.size() != rows.size()) {
      Fail(ErrorCode::kInput, "csv: state samples and metric rows differ in count");
    }
    if (!state->samples.empty()) {
      nx = state->samples.front().x.size();
      ny = state->samples.front().lambda.size();
    }
  }
  out << Join(CsvHeader(nx, ny, state != nullptr), ",") << "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const MetricRow& row = rows[r];
    std::string line;
    for (std::size_t k = 0; k < kMetricColumns.size(); ++k) {
      if (k) line += ',';
      line += FormatDouble(MetricValue(row, kMetricColumns[k]));
    }
    if (state) {
      const TrajectoryState& s = state->samples[r];
      for (Eigen::Index i = 0; i < s.x.size(); ++i) line += ',' + FormatDouble(s.x(i));
      for (Eigen::Index i = 0; i < s.v.size(); ++i) line += ',' + FormatDouble(s.v(i));
      for (Eigen::Index j = 0; j < s.lambda.size(); ++j) line += ',' + FormatDouble(s.lambda(j));
    }
    out << line << "\n";
  }
}

std::string FormatSummaryLine(const RunSummary& s) {
  std::vector<std::string> kv;
  kv.push_back("run=" + s.label);
  kv.push_back("status=" + RunStatusName(s.status));
  kv.push_back("axis=" + SweepAxisName(s.axis));
  if (s.axis != SweepAxis::kNone) kv.push_back("value=" + ShortDouble(s.sweep_value));
  kv.push_back("regime=" + RegimeName(s.regime.regime));
  kv.push_back("nominal=" + RegimeName(s.regime.nominal));
  std::vector<std::string> applicable;
  for (Regime r : s.regime.applicable) applicable.push_back(RegimeName(r));
  kv.push_back("applicable=" + (applicable.empty() ? std::string("-") : Join(applicable, ",")));
  kv.push_back("r=" + ShortDouble(s.regime.r));
  if (s.regime.has_prediction) {
    kv.push_back("pred.gap=" + ShortDouble(s.regime.exponents.gap));
    kv.push_back("pred.feasibility=" + ShortDouble(s.regime.exponents.feasibility));
    kv.push_back("pred.distance=" + ShortDouble(s.regime.exponents.distance));
  }
  kv.push_back(std::string("a1=") + (s.regime.assumptions.satisfies_a1 ? "holds" : "fails"));
  kv.push_back(std::string("a2=") + (s.regime.assumptions.satisfies_a2 ? "holds" : "fails"));
  if (s.has_terminal) {
    for (std::string_view col : kMetricColumns) {
      kv.push_back("final." + std::string(col) + "=" +
                   FormatDouble(MetricValue(s.terminal, col), 9));
    }
  }
  for (const RateResult& r : s.rates) {
    if (r.ok) {
      kv.push_back("rate." + r.metric + "=" + ShortDouble(r.estimate.fitted_slope) + "/" +
                   ShortDouble(r.estimate.predicted_slope) + "/" + VerdictName(r.estimate.verdict));
    } else {
      kv.push_back("rate." + r.metric + "=insufficient");
    }
  }
  for (const OscillationResult& o : s.oscillations) {
    kv.push_back("osc." + o.component + "=" + std::to_string(o.measure.sign_changes) + "/" +
                 ShortDouble(o.measure.total_variation));
  }
  kv.push_back("steps=" + std::to_string(s.accepted_steps) + "/" +
               std::to_string(s.rejected_steps));
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.3f", s.wall_seconds);
  kv.push_back(std::string("wall=") + wall);
  if (!s.csv_path.empty()) kv.push_back("csv=" + s.csv_path);
  if (!s.warnings.empty()) kv.push_back("warnings=" + Quote(Join(s.warnings, "; ")));
  if (!s.message.empty()) kv.push_back("message=" + Quote(s.message));
  return Join(kv, " ");
}

std::string FormatCheckReport(const RunSummary& s) {
  std::ostringstream out;
  const RegimeReport& r = s.regime;
  out << "[" << s.label << "]\n";
  out << "regime = " << RegimeName(r.regime) << "\n";
  out << "nominal = " << RegimeName(r.nominal) << "\n";
  std::vector<std::string> applicable;
  for (Regime g : r.applicable) applicable.push_back(RegimeName(g));
  out << "applicable = " << (applicable.empty() ? std::string("-") : Join(applicable, ", "))
      << "\n";
  out << "r = " << FormatDouble(r.r, 9) << "\n";
  if (r.has_prediction) {
    out << "exponents = envelope " << FormatDouble(r.exponents.envelope, 9) << ", gap "
        << FormatDouble(r.exponents.gap, 9) << ", feasibility "
        << FormatDouble(r.exponents.feasibility, 9) << ", distance "
        << FormatDouble(r.exponents.distance, 9) << "\n";
  } else {
    out << "exponents = none\n";
  }
  out << "A1 = " << (r.assumptions.satisfies_a1 ? "holds" : "fails");
  if (r.assumptions.satisfies_a1) out << " (k1=" << FormatDouble(r.assumptions.k1, 9) << ")";
  out << "\nA2 = " << (r.assumptions.satisfies_a2 ? "holds" : "fails");
  if (r.assumptions.satisfies_a2) out << " (k2=" << FormatDouble(r.assumptions.k2, 9) << ")";
  out << "\n";
  for (const std::string& v : r.violated_conditions) out << "violated: " << v << "\n";
  for (const std::string& w : s.warnings) out << "warning: " << w << "\n";
  return out.str();
}

bool AnyFailed(const std::vector<RunSummary>& summaries) {
  for (const RunSummary& s : summaries) {
    if (s.status == RunStatus::kDiverged || s.status == RunStatus::kFailed) return true;
  }
  return false;
}

std::vector<RunSummary> RunExperiment(const ExperimentConfig& config) {
  ValidateConfig(config);
  const std::vector<SweepMember> members = ExpandSweep(config);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    Fail(ErrorCode::kIo, "output: cannot create '" + config.output_dir + "': " + ec.message());
  }

  std::vector<RunSummary> summaries(members.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < members.size(); i = next++) {
      RunOutput out = RunMember(members[i]);
      out.summary.axis = config.sweep;
      if (!out.metrics.empty()) {
        const std::string path =
            (fs::path(config.output_dir) / (members[i].label + ".csv")).string();
        std::ofstream csv(path, std::ios::binary);
        if (csv) WriteMetricsCsv(csv, out.metrics, config.dump_state ? &out.trajectory : nullptr);
        if (csv) {
          out.summary.csv_path = path;
        } else {
          out.summary.status = RunStatus::kFailed;
          out.summary.message = "cannot write '" + path + "'";
        }
      }
      summaries[i] = std::move(out.summary);
    }
  };
  std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, members.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const std::string summary_path =
      (fs::path(config.output_dir) / (config.name + "_summary.txt")).string();
  std::ofstream sum(summary_path, std::ios::binary);
  if (!sum) Fail(ErrorCode::kIo, "output: cannot write '" + summary_path + "'");
  for (const RunSummary& s : summaries) sum << FormatSummaryLine(s) << "\n";
  return summaries;
}

}  // namespace pdflow
