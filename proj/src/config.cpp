#include "lieflow/config.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "lieflow/runio.hpp"

namespace lieflow {

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::SO2ToC4: return "so2_c4";
    case Experiment::GL2RToC4: return "gl2r_c4";
    case Experiment::GL2CToD4: return "gl2c_d4";
    case Experiment::SO3ToTet: return "so3_tet";
    case Experiment::SO3ToOct: return "so3_oct";
    case Experiment::SO3ToSO2: return "so3_so2";
    case Experiment::SO3ToIco: return "so3_ico";
    case Experiment::MultiObjectTet: return "multi_tet";
    case Experiment::GaussianSO2: return "gauss_so2";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (Experiment e : {Experiment::SO2ToC4, Experiment::GL2RToC4, Experiment::GL2CToD4,
                       Experiment::SO3ToTet, Experiment::SO3ToOct, Experiment::SO3ToSO2,
                       Experiment::SO3ToIco, Experiment::MultiObjectTet, Experiment::GaussianSO2})
    if (s == to_string(e)) return e;
  throw ParseError("unknown experiment: " + s);
}

RunConfig RunConfig::preset(Experiment e) {
  RunConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::SO2ToC4:
    case Experiment::GL2RToC4:
      c.hidden = 128;
      break;
    case Experiment::GL2CToD4:
      c.hidden = 256;  // complex variant doubles the width
      break;
    default:
      c.hidden = 256;
      c.embed_mode = EmbedMode::Sinusoidal;
      c.embed_dim = 16;
      c.steps = 100;
      break;
  }
  if (e == Experiment::SO3ToOct || e == Experiment::SO3ToIco)
    c.schedule = TimeSchedule::Mode::Power;
  c.out_dir = std::string("runs/") + to_string(e);
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "experiment") experiment = experiment_from_string(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "train_samples") train_samples = std::stoll(value);
    else if (key == "test_samples") test_samples = std::stoll(value);
    else if (key == "epochs") epochs = std::stoi(value);
    else if (key == "batch") batch = std::stoi(value);
    else if (key == "lr") lr = std::stod(value);
    else if (key == "hidden") hidden = std::stoi(value);
    else if (key == "embed_mode") embed_mode = embed_mode_from_string(value);
    else if (key == "embed_dim") embed_dim = std::stoi(value);
    else if (key == "max_frequency") max_frequency = std::stod(value);
    else if (key == "schedule") schedule = schedule_mode_from_string(value);
    else if (key == "power_n") power_n = std::stod(value);
    else if (key == "steps") steps = std::stoi(value);
    else if (key == "threads") threads = std::stoi(value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "svg") svg = (value == "true" || value == "1");
    else if (key == "angle_sigma") angle_sigma = std::stod(value);
    else if (key == "posterior_samples") posterior_samples = std::stoll(value);
    else if (key == "posterior_sigma") posterior_sigma = std::stod(value);
    else if (key == "trajectory_dump") trajectory_dump = std::stoi(value);
    else throw ParseError("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed value for config key " + key + ": " + value);
  } catch (const std::out_of_range&) {
    throw ParseError("out-of-range value for config key " + key + ": " + value);
  }
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  out << "experiment=" << to_string(experiment) << '\n'
      << "seed=" << seed << '\n'
      << "train_samples=" << train_samples << '\n'
      << "test_samples=" << test_samples << '\n'
      << "epochs=" << epochs << '\n'
      << "batch=" << batch << '\n'
      << "lr=" << format_double(lr) << '\n'
      << "hidden=" << hidden << '\n'
      << "embed_mode=" << to_string(embed_mode) << '\n'
      << "embed_dim=" << embed_dim << '\n'
      << "max_frequency=" << format_double(max_frequency) << '\n'
      << "schedule=" << to_string(schedule) << '\n'
      << "power_n=" << format_double(power_n) << '\n'
      << "steps=" << steps << '\n'
      << "threads=" << threads << '\n'
      << "out_dir=" << out_dir << '\n'
      << "svg=" << (svg ? "true" : "false") << '\n'
      << "angle_sigma=" << format_double(angle_sigma) << '\n'
      << "posterior_samples=" << posterior_samples << '\n'
      << "posterior_sigma=" << format_double(posterior_sigma) << '\n'
      << "trajectory_dump=" << trajectory_dump << '\n';
  return out.str();
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
  // First pass: find the experiment to select the preset.
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      std::size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  Experiment e = Experiment::SO2ToC4;
  bool have_experiment = false;
  for (const auto& [k, v] : pairs)
    if (k == "experiment") {
      e = experiment_from_string(v);
      have_experiment = true;
    }
  if (!have_experiment) throw ParseError(origin + ": missing required key 'experiment'");
  RunConfig cfg = preset(e);
  for (const auto& [k, v] : pairs) cfg.set(k, v);
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

GroupSpec RunConfig::group_spec() const {
  switch (experiment) {
    case Experiment::SO2ToC4: return GroupSpec::make(GroupKind::SO2);
    case Experiment::GL2RToC4: return GroupSpec::make(GroupKind::GL2RPlus);
    case Experiment::GL2CToD4: return GroupSpec::make(GroupKind::GL2C);
    default: return GroupSpec::make(GroupKind::SO3);
  }
}

ObjectKind RunConfig::object() const {
  switch (experiment) {
    case Experiment::SO2ToC4:
    case Experiment::GL2RToC4: return ObjectKind::Arrow2D;
    case Experiment::GL2CToD4: return ObjectKind::HalfArrow2D;
    case Experiment::MultiObjectTet: return ObjectKind::MultiObject3D;
    default: return ObjectKind::IrregularTetrahedron3D;
  }
}

TargetKind RunConfig::target() const {
  switch (experiment) {
    case Experiment::SO2ToC4:
    case Experiment::GL2RToC4: return TargetKind::C4;
    case Experiment::GL2CToD4: return TargetKind::D4;
    case Experiment::SO3ToTet:
    case Experiment::MultiObjectTet: return TargetKind::Tet;
    case Experiment::SO3ToOct: return TargetKind::Oct;
    case Experiment::SO3ToIco: return TargetKind::Ico;
    case Experiment::SO3ToSO2: return TargetKind::SO2AroundZ;
    case Experiment::GaussianSO2: return TargetKind::GaussianSO2;
  }
  throw ContractError("RunConfig::target: bad experiment");
}

DatasetSpec RunConfig::dataset_spec(std::int64_t count, std::uint64_t seed_offset) const {
  DatasetSpec ds;
  ds.object = object();
  ds.target = target();
  ds.sample_count = count;
  ds.seed = seed + seed_offset;
  ds.angle_sigma = angle_sigma;
  return ds;
}

TimeSchedule RunConfig::time_schedule() const {
  TimeSchedule s;
  s.mode = schedule;
  s.n = power_n;
  return s;
}

TimeEmbedding RunConfig::time_embedding() const {
  TimeEmbedding e;
  e.mode = embed_mode;
  e.dim = embed_mode == EmbedMode::Concat ? 1 : embed_dim;
  e.max_frequency = max_frequency;
  return e;
}

NetOptions RunConfig::net_options() const {
  NetOptions n;
  n.hidden_width = hidden;
  n.embed = time_embedding();
  return n;
}

int RunConfig::resolved_threads() const {
  if (threads > 0) return threads;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

bool RunConfig::is_2d() const {
  return experiment == Experiment::SO2ToC4 || experiment == Experiment::GL2RToC4 ||
         experiment == Experiment::GL2CToD4;
}

}  // namespace lieflow
