#include "pacbayes/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

#include "pacbayes/rng.hpp"

namespace pacbayes {

ProbMeasure Instance::prior_or_uniform() const {
  return prior ? *prior : ProbMeasure::uniform(losses.hypothesis_count());
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(std::string_view line, std::size_t line_no) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == ',')) ++pos;
    if (pos == line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != ',') ++end;
    const std::string token(line.substr(pos, end - pos));
    // strtod accepts the full decimal and exponent syntax; require it to consume the token.
    char* stop = nullptr;
    const double v = std::strtod(token.c_str(), &stop);
    if (stop != token.c_str() + token.size()) throw ParseError(line_no, "not a number: '" + token + "'");
    out.push_back(v);
    pos = end;
  }
  return out;
}

struct Section {
  std::size_t header_line = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::string_view> words;
  std::vector<std::size_t> lines;
};

template <typename Build>
auto build_at(std::size_t line, Build&& build) {
  try {
    return build();
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
}

std::vector<double> single_list(const Section& s, const char* name) {
  std::vector<double> all;
  for (const auto& r : s.rows) all.insert(all.end(), r.begin(), r.end());
  if (all.empty()) throw ParseError(s.header_line, std::string("section [") + name + "] is empty");
  return all;
}

void write_list(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << values[i];
  }
  out << '\n';
}

}  // namespace

Instance parse_instance(std::string_view text) {
  static const char* const kSections[] = {"space", "losses", "binary", "prior", "posterior"};
  std::map<std::string, Section> sections;
  Section* current = nullptr;
  bool in_binary = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (std::find(std::begin(kSections), std::end(kSections), name) == std::end(kSections)) {
        throw ParseError(line_no, "unknown section [" + name + "]");
      }
      if (sections.count(name)) throw ParseError(line_no, "duplicate section [" + name + "]");
      current = &sections[name];
      current->header_line = line_no;
      in_binary = name == "binary";
      continue;
    }
    if (!current) throw ParseError(line_no, "content before the first section header");
    if (in_binary) {
      current->words.push_back(line);
      current->lines.push_back(line_no);
    } else {
      current->rows.push_back(parse_numbers(line, line_no));
      current->lines.push_back(line_no);
    }
  }

  auto require = [&](const char* name) -> const Section& {
    const auto it = sections.find(name);
    if (it == sections.end()) throw ParseError(line_no, std::string("missing section [") + name + "]");
    return it->second;
  };
  const Section& space_sec = require("space");
  const Section& loss_sec = require("losses");

  DataDistribution space = build_at(space_sec.header_line, [&] { return DataDistribution(single_list(space_sec, "space")); });
  if (loss_sec.rows.empty()) throw ParseError(loss_sec.header_line, "section [losses] is empty");
  for (std::size_t r = 0; r < loss_sec.rows.size(); ++r) {
    if (loss_sec.rows[r].size() != space.point_count()) {
      throw ParseError(loss_sec.lines[r], "loss row has " + std::to_string(loss_sec.rows[r].size()) +
                                               " entries; the space has " + std::to_string(space.point_count()) +
                                               " points");
    }
  }
  LossTable losses = build_at(loss_sec.header_line, [&] { return LossTable::from_rows(loss_sec.rows); });
  if (const auto it = sections.find("binary"); it != sections.end()) {
    const Section& sec = it->second;
    if (sec.words.size() != 1 || (sec.words[0] != "true" && sec.words[0] != "false")) {
      throw ParseError(sec.header_line, "[binary] must hold a single true or false");
    }
    const bool declared = sec.words[0] == "true";
    if (declared != losses.is_binary()) {
      throw ParseError(sec.lines[0], declared ? "[binary] is true but the loss table has entries other than 0 and 1"
                                              : "[binary] is false but every loss is 0 or 1");
    }
  }
  Instance inst{std::move(space), std::move(losses), std::nullopt, std::nullopt};

  for (const char* name : {"prior", "posterior"}) {
    const auto it = sections.find(name);
    if (it == sections.end()) continue;
    const Section& sec = it->second;
    auto w = single_list(sec, name);
    if (w.size() != inst.losses.hypothesis_count()) {
      throw ParseError(sec.header_line, std::string("[") + name + "] has " + std::to_string(w.size()) +
                                            " weights; the loss table has " +
                                            std::to_string(inst.losses.hypothesis_count()) + " hypotheses");
    }
    auto measure = build_at(sec.header_line, [&] { return ProbMeasure(std::move(w)); });
    (std::string_view(name) == "prior" ? inst.prior : inst.posterior) = std::move(measure);
  }
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string format_instance(const Instance& instance) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "[space]\n";
  write_list(out, instance.space.probs());
  out << "\n[losses]\n";
  for (std::size_t f = 0; f < instance.losses.hypothesis_count(); ++f) write_list(out, instance.losses.row(f));
  out << "\n[binary]\n" << (instance.losses.is_binary() ? "true" : "false") << '\n';
  if (instance.prior) {
    out << "\n[prior]\n";
    write_list(out, instance.prior->weights());
  }
  if (instance.posterior) {
    out << "\n[posterior]\n";
    write_list(out, instance.posterior->weights());
  }
  return out.str();
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file " + path.string());
  out << format_instance(instance);
  if (!out) throw std::runtime_error("failed writing instance file " + path.string());
}

Instance generate_instance(const InstanceGenOptions& options, std::uint64_t seed) {
  if (options.hypotheses == 0 || options.points == 0) throw std::invalid_argument("instance must be nonempty");
  if (options.loss_levels < 2) throw std::invalid_argument("loss_levels must be at least 2");
  if (!(options.max_error >= 0.0 && options.max_error <= 1.0)) throw std::invalid_argument("max_error must lie in [0, 1]");
  CounterRng rng(seed);
  std::vector<double> probs(options.points);
  for (auto& p : probs) p = 0.05 + rng.uniform01();
  double total = 0.0;
  for (double p : probs) total += p;
  for (auto& p : probs) p /= total;

  const double top = static_cast<double>(options.loss_levels - 1);
  std::vector<std::vector<double>> rows(options.hypotheses, std::vector<double>(options.points));
  for (auto& row : rows) {
    const double rate = options.max_error * rng.uniform01();
    for (auto& v : row) {
      if (options.loss_levels == 2) {
        v = rng.uniform01() < rate ? 1.0 : 0.0;
      } else {
        // Mean of the level is rate; spread it over the grid.
        const double x = std::clamp(rate + (rng.uniform01() - 0.5) * rate, 0.0, 1.0);
        v = std::round(x * top) / top;
      }
    }
  }
  DataDistribution space(std::move(probs));
  LossTable losses = LossTable::from_rows(rows);
  const auto risks = true_risks(losses, space);
  const auto best = static_cast<std::size_t>(std::min_element(risks.begin(), risks.end()) - risks.begin());
  Instance inst{std::move(space), std::move(losses), ProbMeasure::uniform(options.hypotheses),
                ProbMeasure::point_mass(options.hypotheses, best)};
  return inst;
}

}  // namespace pacbayes
