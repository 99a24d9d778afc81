#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "mindless/analytics/report.hpp"

namespace mindless::analytics {

namespace {

struct Bar {
  std::string label;
  double mean = 0.0;
  double sd = 0.0;
};

constexpr int kPanelWidth = 260;
constexpr int kPanelHeight = 220;
constexpr int kMargin = 40;

void panel(std::ostringstream& os, int x0, const std::string& title, const std::vector<Bar>& bars) {
  os << "<g transform=\"translate(" << x0 << ",0)\">\n"
     << "<text x=\"" << kPanelWidth / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title
     << "</text>\n";
  const int base = kPanelHeight - kMargin;
  const int top = 35;
  os << "<line x1=\"" << kMargin << "\" y1=\"" << base << "\" x2=\"" << kPanelWidth - 10
     << "\" y2=\"" << base << "\" stroke=\"black\"/>\n";
  if (bars.empty()) {
    os << "<text x=\"" << kPanelWidth / 2 << "\" y=\"" << base / 2
       << "\" text-anchor=\"middle\">no data</text>\n</g>\n";
    return;
  }
  double hi = 0.0;
  for (const auto& b : bars) hi = std::max(hi, b.mean + b.sd);
  if (hi <= 0.0) hi = 1.0;
  const double scale = (base - top) / hi;
  const int slot = (kPanelWidth - kMargin - 10) / static_cast<int>(bars.size());
  os << std::fixed << std::setprecision(1);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const double cx = kMargin + slot * (i + 0.5);
    const double h = b.mean * scale;
    os << "<rect x=\"" << cx - slot * 0.3 << "\" y=\"" << base - h << "\" width=\"" << slot * 0.6
       << "\" height=\"" << h << "\" fill=\"#7a9cc6\"/>\n";
    if (b.sd > 0.0) {
      const double y1 = base - (b.mean + b.sd) * scale;
      const double y2 = base - std::max(0.0, b.mean - b.sd) * scale;
      os << "<line x1=\"" << cx << "\" y1=\"" << y1 << "\" x2=\"" << cx << "\" y2=\"" << y2
         << "\" stroke=\"black\"/>\n";
    }
    os << "<text x=\"" << cx << "\" y=\"" << base + 15 << "\" text-anchor=\"middle\">" << b.label
       << "</text>\n"
       << "<text x=\"" << cx << "\" y=\"" << base - h - 4 << "\" text-anchor=\"middle\">"
       << b.mean << "</text>\n";
  }
  os << "</g>\n";
}

std::vector<Bar> bars_from(const nlohmann::json& group, std::initializer_list<const char*> keys) {
  std::vector<Bar> bars;
  for (const char* key : keys) {
    const auto it = group.find(key);
    if (it == group.end() || it->value("n", 0) == 0) continue;
    bars.push_back({key, it->value("mean", 0.0), it->value("sd", 0.0)});
  }
  return bars;
}

} // namespace

std::string render_svg(const nlohmann::json& report) {
  const auto empty = nlohmann::json::object();
  auto section = [&](const char* key) -> const nlohmann::json& {
    const auto it = report.find(key);
    return it == report.end() ? empty : *it;
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 3 * kPanelWidth << "\" height=\""
     << kPanelHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  panel(os, 0, "distracted time (s)",
        bars_from(section("distracted_time_by_mode"), {"mindless", "alerting", "control"}));
  panel(os, kPanelWidth, "distraction count",
        bars_from(section("distraction_count_by_mode"), {"mindless", "alerting", "control"}));
  panel(os, 2 * kPanelWidth, "recovery time (s)",
        bars_from(section("recovery_time"), {"treatment", "control"}));
  os << "</svg>\n";
  return os.str();
}

} // namespace mindless::analytics
