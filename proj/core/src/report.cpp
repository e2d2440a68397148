#include "arnn/report.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "arnn/csv.hpp"
#include "arnn/errors.hpp"

namespace arnn {

namespace {

constexpr std::array<const char*, 4> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::string opt(const std::optional<double>& v) { return v ? csv::format(*v) : "null"; }

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::optional<double> metric_of(const NodeMetrics& m, NodeMetric metric) {
  switch (metric) {
    case NodeMetric::Accuracy: return m.accuracy;
    case NodeMetric::Tnr: return m.tnr;
    case NodeMetric::Tpr: return m.tpr;
  }
  return std::nullopt;
}

const char* metric_name(NodeMetric metric) {
  switch (metric) {
    case NodeMetric::Accuracy: return "Accuracy";
    case NodeMetric::Tnr: return "TNR";
    case NodeMetric::Tpr: return "TPR";
  }
  return "";
}

std::optional<BoxStats> box_of(const AggregateMetrics& a, NodeMetric metric) {
  switch (metric) {
    case NodeMetric::Accuracy: return a.accuracy_box;
    case NodeMetric::Tnr: return a.tnr_box;
    case NodeMetric::Tpr: return a.tpr_box;
  }
  return std::nullopt;
}

void write_box_rows(std::ostream& out, const std::string& model, const char* prefix,
                    const std::optional<BoxStats>& b) {
  const std::array<std::pair<const char*, std::optional<double>>, 5> rows = {{
      {"min", b ? std::optional(b->min) : std::nullopt},
      {"q1", b ? std::optional(b->q1) : std::nullopt},
      {"median", b ? std::optional(b->median) : std::nullopt},
      {"q3", b ? std::optional(b->q3) : std::nullopt},
      {"max", b ? std::optional(b->max) : std::nullopt},
  }};
  for (const auto& [name, v] : rows) {
    out << model << ',' << prefix << '_' << name << ',' << opt(v) << '\n';
  }
}

}  // namespace

void write_decisions(const std::filesystem::path& path, const DecisionTable& table) {
  const auto rows = static_cast<Eigen::Index>(table.slots.size());
  const auto cols = static_cast<Eigen::Index>(table.registry.size());
  if (table.score.rows() != rows || table.score.cols() != cols || table.decision.rows() != rows ||
      table.decision.cols() != cols || table.truth.rows() != rows || table.truth.cols() != cols) {
    throw ShapeError("decision table matrices do not match slots x nodes");
  }
  auto out = open_out(path);
  out << "slot,node," << table.score_name << ",Z,G\n";
  for (Eigen::Index l = 0; l < rows; ++l) {
    for (Eigen::Index i = 0; i < cols; ++i) {
      out << table.slots[static_cast<std::size_t>(l)] << ',' << table.registry.id_of(static_cast<std::size_t>(i))
          << ',' << csv::format(table.score(l, i)) << ',' << table.decision(l, i) << ',' << table.truth(l, i)
          << '\n';
    }
  }
  finish(out, path);
}

DecisionTable read_decisions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  DecisionTable t;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> node_index;
  std::map<long, std::size_t> slot_index;
  struct Row {
    long slot;
    std::size_t node;
    double score;
    int z, g;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) {
      continue;
    }
    const auto f = csv::split(trimmed);
    if (f.size() != 5) {
      throw ParseError("expected 5 fields slot,node,score,Z,G", line_no);
    }
    if (line_no == 1 && f[0] == "slot") {
      t.score_name = std::string(f[2]);
      continue;
    }
    const auto slot = csv::to_long(f[0]);
    const auto score = csv::to_double(f[2]);
    if (!slot || !score || (f[3] != "0" && f[3] != "1") || (f[4] != "0" && f[4] != "1")) {
      throw ParseError("malformed decision row", line_no);
    }
    const auto [it, inserted] = node_index.emplace(std::string(f[1]), ids.size());
    if (inserted) {
      ids.emplace_back(f[1]);
    }
    slot_index.emplace(*slot, 0);
    rows.push_back({*slot, it->second, *score, f[3] == "1", f[4] == "1"});
  }
  if (rows.empty()) {
    throw ShapeError("decision file " + path.string() + " has no rows");
  }
  t.registry = NodeRegistry(ids);
  for (auto& [slot, idx] : slot_index) {
    idx = t.slots.size();
    t.slots.push_back(slot);
  }
  const auto nr = static_cast<Eigen::Index>(t.slots.size());
  const auto nc = static_cast<Eigen::Index>(ids.size());
  if (rows.size() != t.slots.size() * ids.size()) {
    throw ShapeError("decision file does not hold one row per (slot, node)");
  }
  t.score = Matrix::Zero(nr, nc);
  t.decision = BinaryMatrix::Zero(nr, nc);
  t.truth = BinaryMatrix::Zero(nr, nc);
  for (const auto& r : rows) {
    const auto l = static_cast<Eigen::Index>(slot_index[r.slot]);
    const auto i = static_cast<Eigen::Index>(r.node);
    t.score(l, i) = r.score;
    t.decision(l, i) = r.z;
    t.truth(l, i) = r.g;
  }
  return t;
}

EvaluationSet evaluate(const std::string& model, const DecisionTable& table) {
  auto nodes = per_node_metrics(table.truth, table.decision);
  auto agg = aggregate(nodes);
  return {model, std::move(nodes), std::move(agg)};
}

std::vector<std::filesystem::path> emit_report(const std::filesystem::path& dir, const NodeRegistry& registry,
                                               const std::vector<EvaluationSet>& sets) {
  if (sets.empty()) {
    throw ShapeError("nothing to report");
  }
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  const auto per_node = dir / "per_node.csv";
  {
    auto out = open_out(per_node);
    out << "model,node,TP,TN,FP,FN,accuracy,tnr,tpr,f1\n";
    for (const auto& s : sets) {
      for (const auto& m : s.nodes) {
        out << s.model << ',' << registry.id_of(m.node) << ',' << m.tp << ',' << m.tn << ',' << m.fp << ','
            << m.fn << ',' << csv::format(m.accuracy) << ',' << opt(m.tnr) << ',' << opt(m.tpr) << ','
            << opt(f1_score(m.tp, m.fp, m.fn)) << '\n';
      }
    }
    finish(out, per_node);
  }
  written.push_back(per_node);

  const auto agg_path = dir / "aggregate.csv";
  {
    auto out = open_out(agg_path);
    out << "model,metric,value\n";
    for (const auto& s : sets) {
      const auto& a = s.aggregate;
      out << s.model << ",nodes," << a.nodes << '\n';
      out << s.model << ",nodes_with_tnr," << a.nodes_with_tnr << '\n';
      out << s.model << ",nodes_with_tpr," << a.nodes_with_tpr << '\n';
      out << s.model << ",TP," << a.tp << '\n';
      out << s.model << ",TN," << a.tn << '\n';
      out << s.model << ",FP," << a.fp << '\n';
      out << s.model << ",FN," << a.fn << '\n';
      out << s.model << ",macro_accuracy," << csv::format(a.macro_accuracy) << '\n';
      out << s.model << ",macro_tnr," << opt(a.macro_tnr) << '\n';
      out << s.model << ",macro_tpr," << opt(a.macro_tpr) << '\n';
      out << s.model << ",macro_f1," << opt(a.macro_f1) << '\n';
      out << s.model << ",pooled_accuracy," << csv::format(a.pooled_accuracy) << '\n';
      out << s.model << ",pooled_tnr," << opt(a.pooled_tnr) << '\n';
      out << s.model << ",pooled_tpr," << opt(a.pooled_tpr) << '\n';
      out << s.model << ",pooled_f1," << opt(a.pooled_f1) << '\n';
      write_box_rows(out, s.model, "accuracy", a.accuracy_box);
      write_box_rows(out, s.model, "tnr", a.tnr_box);
      write_box_rows(out, s.model, "tpr", a.tpr_box);
    }
    finish(out, agg_path);
  }
  written.push_back(agg_path);

  const auto write_text = [&](const std::filesystem::path& p, const std::string& text) {
    auto out = open_out(p);
    out << text;
    finish(out, p);
    written.push_back(p);
  };
  write_text(dir / "boxplot.svg", render_box_svg(sets));
  write_text(dir / "accuracy.svg", render_bar_svg(registry, sets, NodeMetric::Accuracy));
  write_text(dir / "tnr.svg", render_bar_svg(registry, sets, NodeMetric::Tnr));
  write_text(dir / "tpr.svg", render_bar_svg(registry, sets, NodeMetric::Tpr));
  return written;
}

void write_gamma_sweep(const std::filesystem::path& path, const std::vector<GammaSweepRow>& rows) {
  auto out = open_out(path);
  out << "gamma,macro_accuracy,macro_tnr,macro_tpr,median_accuracy,q1_accuracy,pooled_accuracy,pooled_tnr,"
         "pooled_tpr,pooled_f1,TP,TN,FP,FN\n";
  for (const auto& r : rows) {
    const auto& a = r.aggregate;
    out << csv::format(r.gamma) << ',' << csv::format(a.macro_accuracy) << ',' << opt(a.macro_tnr) << ','
        << opt(a.macro_tpr) << ',' << csv::format(a.accuracy_box.median) << ',' << csv::format(a.accuracy_box.q1)
        << ',' << csv::format(a.pooled_accuracy) << ',' << opt(a.pooled_tnr) << ',' << opt(a.pooled_tpr) << ','
        << opt(a.pooled_f1) << ',' << a.tp << ',' << a.tn << ',' << a.fp << ',' << a.fn << '\n';
  }
  finish(out, path);
}

void write_cost_trace(const std::filesystem::path& path, const std::vector<EpochRecord>& trace) {
  auto out = open_out(path);
  out << "epoch,cost,skipped\n";
  for (const auto& e : trace) {
    out << e.epoch << ',' << csv::format(e.cost) << ',' << e.skipped << '\n';
  }
  finish(out, path);
}

std::string render_box_svg(const std::vector<EvaluationSet>& sets) {
  constexpr double kWidth = 720, kHeight = 420, kLeft = 60, kTop = 40, kPlotH = 320;
  const std::array<NodeMetric, 3> metrics = {NodeMetric::Accuracy, NodeMetric::Tnr, NodeMetric::Tpr};
  const double group_w = (kWidth - kLeft - 20) / 3.0;
  const auto y_of = [&](double v) { return kTop + kPlotH * (1.0 - v); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth) << "\" height=\"" << fixed(kHeight)
      << "\" viewBox=\"0 0 " << fixed(kWidth) << ' ' << fixed(kHeight) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fixed(kWidth) << "\" height=\"" << fixed(kHeight)
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">Per-node Accuracy, TNR and TPR</text>\n";
  for (int tick = 0; tick <= 10; tick += 2) {
    const double v = tick / 10.0;
    svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(y_of(v)) << "\" x2=\"" << fixed(kWidth - 20)
        << "\" y2=\"" << fixed(y_of(v)) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(y_of(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick * 10 << "%</text>\n";
  }
  const double box_w = std::min(40.0, group_w / (static_cast<double>(sets.size()) + 1.0));
  for (std::size_t g = 0; g < metrics.size(); ++g) {
    const double gx = kLeft + group_w * static_cast<double>(g);
    svg << "<text x=\"" << fixed(gx + group_w / 2) << "\" y=\"" << fixed(kTop + kPlotH + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << metric_name(metrics[g])
        << "</text>\n";
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const auto box = box_of(sets[s].aggregate, metrics[g]);
      if (!box) {
        continue;
      }
      const char* color = kPalette[s % kPalette.size()];
      const double cx = gx + group_w * (static_cast<double>(s) + 1.0) / (static_cast<double>(sets.size()) + 1.0);
      svg << "<line x1=\"" << fixed(cx) << "\" y1=\"" << fixed(y_of(box->max)) << "\" x2=\"" << fixed(cx)
          << "\" y2=\"" << fixed(y_of(box->min)) << "\" stroke=\"" << color << "\"/>\n";
      svg << "<rect x=\"" << fixed(cx - box_w / 2) << "\" y=\"" << fixed(y_of(box->q3)) << "\" width=\""
          << fixed(box_w) << "\" height=\"" << fixed(y_of(box->q1) - y_of(box->q3)) << "\" fill=\"" << color
          << "\" fill-opacity=\"0.3\" stroke=\"" << color << "\"/>\n";
      svg << "<line x1=\"" << fixed(cx - box_w / 2) << "\" y1=\"" << fixed(y_of(box->median)) << "\" x2=\""
          << fixed(cx + box_w / 2) << "\" y2=\"" << fixed(y_of(box->median)) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
    }
  }
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const double lx = kLeft + 110.0 * static_cast<double>(s);
    svg << "<rect x=\"" << fixed(lx) << "\" y=\"" << fixed(kHeight - 22) << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[s % kPalette.size()] << "\"/>\n";
    svg << "<text x=\"" << fixed(lx + 14) << "\" y=\"" << fixed(kHeight - 13)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(sets[s].model) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_bar_svg(const NodeRegistry& registry, const std::vector<EvaluationSet>& sets,
                           NodeMetric metric) {
  const std::size_t n = registry.size();
  const std::size_t k = std::max<std::size_t>(sets.size(), 1);
  constexpr double kLeft = 60, kTop = 40, kPlotH = 300, kBar = 8;
  const double slot_w = kBar * static_cast<double>(k) + 6.0;
  const double width = std::max(600.0, kLeft + 20 + slot_w * static_cast<double>(n));
  const double height = kTop + kPlotH + 90;
  const auto y_of = [&](double v) { return kTop + kPlotH * (1.0 - v); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
      << "\" viewBox=\"0 0 " << fixed(width) << ' ' << fixed(height) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << metric_name(metric) << " per node</text>\n";
  for (int tick = 0; tick <= 10; tick += 2) {
    const double v = tick / 10.0;
    svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(y_of(v)) << "\" x2=\"" << fixed(width - 20)
        << "\" y2=\"" << fixed(y_of(v)) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(y_of(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick * 10 << "%</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = kLeft + slot_w * static_cast<double>(i) + 3.0;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      if (i >= sets[s].nodes.size()) {
        continue;
      }
      const auto v = metric_of(sets[s].nodes[i], metric);
      if (!v) {
        continue;
      }
      svg << "<rect x=\"" << fixed(x0 + kBar * static_cast<double>(s)) << "\" y=\"" << fixed(y_of(*v))
          << "\" width=\"" << fixed(kBar - 1) << "\" height=\"" << fixed(kPlotH * *v) << "\" fill=\""
          << kPalette[s % kPalette.size()] << "\"/>\n";
    }
    const double lx = x0 + slot_w / 2 - 3.0;
    const double ly = kTop + kPlotH + 8;
    svg << "<text x=\"" << fixed(lx) << "\" y=\"" << fixed(ly) << "\" font-family=\"sans-serif\" font-size=\"8\" "
        << "transform=\"rotate(90 " << fixed(lx) << ' ' << fixed(ly) << ")\">" << xml_escape(registry.id_of(i))
        << "</text>\n";
  }
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const double lx = kLeft + 110.0 * static_cast<double>(s);
    svg << "<rect x=\"" << fixed(lx) << "\" y=\"" << fixed(height - 22) << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[s % kPalette.size()] << "\"/>\n";
    svg << "<text x=\"" << fixed(lx + 14) << "\" y=\"" << fixed(height - 13)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(sets[s].model) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace arnn
