#include "eit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "eit/io.hpp"
#include "eit/parallel.hpp"
#include "eit/rng.hpp"

namespace eit {

namespace fs = std::filesystem;

namespace {

int delta_index(const ExperimentConfig& cfg, double delta) {
  for (std::size_t i = 0; i < cfg.noise.size(); ++i)
    if (cfg.noise[i] == delta) return int(i);
  throw std::invalid_argument("noise level not present in the dataset config");
}

std::uint64_t train_seed(const ExperimentConfig& cfg, const std::string& kind, int dindex,
                         int rep) {
  const std::uint64_t kind_tag = (kind == "raw") ? 1 : 2;
  return Rng::derive(Rng::derive(cfg.master_seed, 9000 + kind_tag),
                     std::uint64_t(dindex) * 1000 + std::uint64_t(rep));
}

} // namespace

TrainedModels train_models(const DatasetManifest& manifest, const std::string& input_kind,
                           double delta, int repetitions, int max_epochs, int workers) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.j.at("config"));
  const int dindex = delta_index(cfg, delta);
  const FeatureSet train = load_features(manifest, 0, input_kind, delta);
  TrainedModels out;
  out.kind = input_kind;
  out.delta = delta;
  out.standardizer = Standardizer::fit(train.X);
  const Eigen::MatrixXd Xs = out.standardizer.apply(train.X);
  out.reps.resize(std::size_t(repetitions));
  parallel_for(
      repetitions,
      [&](int r) {
        TrainConfig tc;
        tc.max_epochs = max_epochs;
        tc.seed = train_seed(cfg, input_kind, dindex, r);
        const MLPParams init = init_params(int(Xs.rows()), tc.seed);
        out.reps[std::size_t(r)] = train_scg(init, Xs, train.y, tc);
        if (out.reps[std::size_t(r)].diverged)
          throw std::runtime_error("train_models: SCG diverged (non-finite loss)");
      },
      workers);
  return out;
}

void save_models(const TrainedModels& models, const DatasetManifest& manifest) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.j.at("config"));
  const fs::path dir = manifest.root / "models";
  fs::create_directories(dir);
  const std::string base = models.kind + "_" + cfg.noise_tag(models.delta);
  Eigen::VectorXd st(models.standardizer.mean.size() * 2);
  st << models.standardizer.mean, models.standardizer.scale;
  write_f64(dir / ("std_" + base + ".f64"), st);
  for (std::size_t r = 0; r < models.reps.size(); ++r) {
    const auto& res = models.reps[r];
    const std::string stem = base + "_rep" + std::to_string(r);
    write_f64(dir / (stem + ".f64"), res.params.flatten());
    write_json(dir / (stem + ".json"),
               {{"n1", res.params.n1()},
                {"hidden", res.params.hidden()},
                {"final_loss", res.final_loss},
                {"epochs", res.log.empty() ? 0 : res.log.back().epoch}});
    std::ofstream log(dir / (stem + "_log.csv"));
    log << "epoch,loss,lambda\n";
    for (const auto& rowl : res.log)
      log << rowl.epoch << ',' << rowl.loss << ',' << rowl.lambda << '\n';
  }
}

TrainedModels load_models(const DatasetManifest& manifest, const std::string& input_kind,
                          double delta) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.j.at("config"));
  const fs::path dir = manifest.root / "models";
  const std::string base = input_kind + "_" + cfg.noise_tag(delta);
  TrainedModels out;
  out.kind = input_kind;
  out.delta = delta;
  const Eigen::VectorXd st = read_f64(dir / ("std_" + base + ".f64"));
  out.standardizer.mean = st.head(st.size() / 2);
  out.standardizer.scale = st.tail(st.size() / 2);
  for (int r = 0;; ++r) {
    const std::string stem = base + "_rep" + std::to_string(r);
    if (!fs::exists(dir / (stem + ".f64"))) break;
    const nlohmann::json hdr = read_json(dir / (stem + ".json"));
    TrainResult res;
    res.params = MLPParams::unflatten(read_f64(dir / (stem + ".f64")),
                                      hdr.at("n1").get<int>(), hdr.at("hidden").get<int>());
    res.final_loss = hdr.at("final_loss").get<double>();
    out.reps.push_back(std::move(res));
  }
  if (out.reps.empty())
    throw std::runtime_error("load_models: no checkpoints for " + base +
                             " (run the train step first)");
  return out;
}

std::vector<ReportRow> evaluate_models(const DatasetManifest& manifest,
                                       const TrainedModels& models) {
  std::vector<ReportRow> rows;
  for (int set = 1; set <= 3; ++set) {
    const FeatureSet test = load_features(manifest, set, models.kind, models.delta);
    const Eigen::MatrixXd Xt = models.standardizer.apply(test.X);
    std::vector<Metrics> per_rep;
    for (const auto& rep : models.reps) per_rep.push_back(evaluate(rep.params, Xt, test.y));
    ReportRow row;
    row.test_set = kSetNames[set];
    row.input_kind = models.kind;
    row.delta = models.delta;
    row.repetitions = int(per_rep.size());
    auto stats = [&](auto getter, double& mean, double& sd) {
      double s = 0.0, s2 = 0.0;
      for (const auto& m : per_rep) {
        const double v = getter(m);
        s += v;
        s2 += v * v;
      }
      mean = s / double(per_rep.size());
      const double var = s2 / double(per_rep.size()) - mean * mean;
      sd = std::sqrt(std::max(var, 0.0));
    };
    stats([](const Metrics& m) { return m.accuracy; }, row.acc_mean, row.acc_std);
    stats([](const Metrics& m) { return m.sensitivity; }, row.sens_mean, row.sens_std);
    stats([](const Metrics& m) { return m.specificity; }, row.spec_mean, row.spec_std);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ReportRow> run_experiment(const DatasetManifest& manifest,
                                      const std::string& input_kind, double delta,
                                      int repetitions, int max_epochs, int workers) {
  const TrainedModels models =
      train_models(manifest, input_kind, delta, repetitions, max_epochs, workers);
  save_models(models, manifest);
  return evaluate_models(manifest, models);
}

namespace {

nlohmann::json row_to_json(const ReportRow& r) {
  return {{"test_set", r.test_set}, {"input", r.input_kind},  {"delta", r.delta},
          {"reps", r.repetitions},  {"acc_mean", r.acc_mean}, {"acc_std", r.acc_std},
          {"sens_mean", r.sens_mean}, {"sens_std", r.sens_std}, {"spec_mean", r.spec_mean},
          {"spec_std", r.spec_std}};
}

ReportRow row_from_json(const nlohmann::json& j) {
  ReportRow r;
  r.test_set = j.at("test_set").get<std::string>();
  r.input_kind = j.at("input").get<std::string>();
  r.delta = j.at("delta").get<double>();
  r.repetitions = j.at("reps").get<int>();
  r.acc_mean = j.at("acc_mean").get<double>();
  r.acc_std = j.at("acc_std").get<double>();
  r.sens_mean = j.at("sens_mean").get<double>();
  r.sens_std = j.at("sens_std").get<double>();
  r.spec_mean = j.at("spec_mean").get<double>();
  r.spec_std = j.at("spec_std").get<double>();
  return r;
}

std::string row_key(const ReportRow& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s|%s|%g", r.test_set.c_str(), r.input_kind.c_str(), r.delta);
  return buf;
}

} // namespace

void save_rows(const std::vector<ReportRow>& rows, const fs::path& outdir) {
  const fs::path file = outdir / "report" / "rows.json";
  fs::create_directories(outdir / "report");
  std::vector<ReportRow> all;
  if (fs::exists(file))
    for (const auto& j : read_json(file)) all.push_back(row_from_json(j));
  for (const auto& r : rows) {
    const std::string key = row_key(r);
    bool replaced = false;
    for (auto& existing : all)
      if (row_key(existing) == key) {
        existing = r;
        replaced = true;
      }
    if (!replaced) all.push_back(r);
  }
  std::sort(all.begin(), all.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.test_set, a.delta, a.input_kind) < std::tie(b.test_set, b.delta, b.input_kind);
  });
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : all) j.push_back(row_to_json(r));
  write_json(file, j);
}

std::vector<ReportRow> load_rows(const fs::path& outdir) {
  std::vector<ReportRow> rows;
  for (const auto& j : read_json(outdir / "report" / "rows.json"))
    rows.push_back(row_from_json(j));
  return rows;
}

void emit_report(const std::vector<ReportRow>& rows, const fs::path& outdir) {
  if (rows.empty()) throw std::invalid_argument("emit_report: no rows");
  fs::create_directories(outdir / "report");
  std::vector<ReportRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.test_set, a.delta, a.input_kind) <
           std::tie(b.test_set, b.delta, b.input_kind);
  });
  {
    std::ofstream csv(outdir / "report" / "report.csv");
    csv << "test_set,input,delta,reps,acc_mean,acc_std,sens_mean,sens_std,spec_mean,spec_std\n";
    char buf[256];
    for (const auto& r : sorted) {
      std::snprintf(buf, sizeof buf, "%s,%s,%g,%d,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                    r.test_set.c_str(), r.input_kind.c_str(), r.delta, r.repetitions, r.acc_mean,
                    r.acc_std, r.sens_mean, r.sens_std, r.spec_mean, r.spec_std);
      csv << buf;
    }
  }
  {
    std::ofstream txt(outdir / "report" / "report.txt");
    txt << "Stroke classification summary (mean +- std over training repetitions)\n\n";
    std::vector<std::string> sets;
    for (const auto& r : sorted)
      if (std::find(sets.begin(), sets.end(), r.test_set) == sets.end())
        sets.push_back(r.test_set);
    for (const auto& set : sets) {
      txt << "Test set: " << set << "\n";
      txt << "  noise        input  accuracy            sensitivity         specificity\n";
      std::vector<double> deltas;
      for (const auto& r : sorted)
        if (r.test_set == set && std::find(deltas.begin(), deltas.end(), r.delta) == deltas.end())
          deltas.push_back(r.delta);
      for (double d : deltas) {
        double best = -1.0;
        for (const auto& r : sorted)
          if (r.test_set == set && r.delta == d) best = std::max(best, r.acc_mean);
        for (const auto& r : sorted) {
          if (r.test_set != set || r.delta != d) continue;
          char buf[256];
          const bool is_best = r.acc_mean == best;
          std::snprintf(buf, sizeof buf, "  delta=%-6g %-5s  %s%.4f+-%.4f%s  %.4f+-%.4f       %.4f+-%.4f\n",
                        r.delta, r.input_kind.c_str(), is_best ? "**" : "  ", r.acc_mean,
                        r.acc_std, is_best ? "**" : "  ", r.sens_mean, r.sens_std, r.spec_mean,
                        r.spec_std);
          txt << buf;
        }
      }
      txt << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// SVG profile plots
// ---------------------------------------------------------------------------

namespace {

struct SvgCanvas {
  std::ostringstream body;
  double w = 640, h = 400;
  double ml = 60, mr = 15, mt = 30, mb = 40;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); }
  double py(double y) const { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); }

  void polyline(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color) {
    body << "<polyline fill='none' stroke='" << color << "' stroke-width='1.3' points='";
    for (int i = 0; i < x.size(); ++i) body << px(x[i]) << ',' << py(y[i]) << ' ';
    body << "'/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12,
            const std::string& anchor = "start") {
    body << "<text x='" << x << "' y='" << y << "' font-size='" << size
         << "' font-family='sans-serif' text-anchor='" << anchor << "'>" << s << "</text>\n";
  }
  void axes(const std::string& xlabel, const std::string& ylabel) {
    body << "<rect x='" << ml << "' y='" << mt << "' width='" << w - ml - mr << "' height='"
         << h - mt - mb << "' fill='none' stroke='black' stroke-width='1'/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2g", xv);
      text(px(xv), h - mb + 16, buf, 10, "middle");
      std::snprintf(buf, sizeof buf, "%.2g", yv);
      text(ml - 6, py(yv) + 4, buf, 10, "end");
      body << "<line x1='" << px(xv) << "' y1='" << h - mb << "' x2='" << px(xv) << "' y2='"
           << h - mb + 4 << "' stroke='black'/>\n";
      body << "<line x1='" << ml - 4 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='" << py(yv)
           << "' stroke='black'/>\n";
    }
    text(0.5 * (ml + w - mr), h - 8, xlabel, 12, "middle");
    text(14, 0.5 * (mt + h - mb), ylabel, 12, "middle");
  }
  void save(const fs::path& path, const std::string& title) {
    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<text x='" << w / 2 << "' y='18' font-size='13' font-family='sans-serif' "
        << "text-anchor='middle'>" << title << "</text>\n";
    out << body.str() << "</svg>\n";
  }
};

} // namespace

void emit_profile_plots(const DatasetManifest& manifest, const std::vector<std::string>& ids,
                        double delta, const fs::path& plotdir) {
  const ExperimentConfig cfg = ExperimentConfig::from_json(manifest.j.at("config"));
  const std::string tag = cfg.noise_tag(delta);
  fs::create_directories(plotdir);
  const int na = int(cfg.angle_indices.size()), nt = cfg.n_t;
  Eigen::VectorXd t(nt);
  for (int i = 0; i < nt; ++i) t[i] = cfg.t_lo + (cfg.t_hi - cfg.t_lo) * i / (nt - 1);

  auto find_row = [&](const std::string& id) -> const nlohmann::json& {
    for (const auto& row : manifest.j.at("samples"))
      if (row.at("id").get<std::string>() == id) return row;
    throw std::invalid_argument("emit_profile_plots: unknown sample id " + id);
  };
  auto load_profile = [&](const std::string& id) {
    const auto& row = find_row(id);
    const std::string fname = "profile_" + tag + ".c64";
    if (!row.at("files").contains(fname))
      throw std::runtime_error("emit_profile_plots: missing profile file for " + id);
    return read_c64_matrix(manifest.root / row.at("files").at(fname).get<std::string>(), na, nt);
  };
  auto slug = [](std::string s) {
    for (auto& c : s)
      if (c == '/') c = '_';
    return s;
  };

  std::vector<std::pair<std::string, Eigen::MatrixXcd>> loaded;
  for (const auto& id : ids) loaded.emplace_back(id, load_profile(id));

  for (const auto& [id, T] : loaded) {
    const auto& row = find_row(id);
    for (int a = 0; a < na; ++a) {
      SvgCanvas c;
      const Eigen::VectorXd re = T.row(a).real(), im = T.row(a).imag();
      const double lim = std::max({re.cwiseAbs().maxCoeff(), im.cwiseAbs().maxCoeff(), 1e-12});
      c.x0 = cfg.t_lo;
      c.x1 = cfg.t_hi;
      c.y0 = -1.1 * lim;
      c.y1 = 1.1 * lim;
      c.axes("pseudo-time t", "T_odd");
      c.polyline(t, re, "#1f77b4");
      c.polyline(t, im, "#d62728");
      c.text(c.px(cfg.t_lo) + 8, c.py(c.y1) + 14, "Re (blue), Im (red)", 11);
      char note[64];
      std::snprintf(note, sizeof note, "max |T_odd| = %.3g", lim);
      c.text(c.px(cfg.t_lo) + 8, c.py(c.y1) + 28, note, 11);
      char title[128];
      std::snprintf(title, sizeof title, "%s  label=%d  angle index %d  (%s)", id.c_str(),
                    row.at("label").get<int>(), cfg.angle_indices[std::size_t(a)], tag.c_str());
      c.save(plotdir / (slug(id) + "_angle" +
                        std::to_string(cfg.angle_indices[std::size_t(a)]) + "_" + tag + ".svg"),
             title);
    }
  }

  // paired overlay: first hemorrhagic vs first ischemic among ids
  const std::pair<std::string, Eigen::MatrixXcd>*hem = nullptr, *isch = nullptr;
  for (const auto& p : loaded) {
    const int label = find_row(p.first).at("label").get<int>();
    if (label == 1 && !hem) hem = &p;
    if (label == 0 && !isch) isch = &p;
  }
  if (hem && isch) {
    SvgCanvas c;
    const Eigen::VectorXd rh = hem->second.row(0).real(), ri = isch->second.row(0).real();
    const double lim = std::max({rh.cwiseAbs().maxCoeff(), ri.cwiseAbs().maxCoeff(), 1e-12});
    c.x0 = cfg.t_lo;
    c.x1 = cfg.t_hi;
    c.y0 = -1.1 * lim;
    c.y1 = 1.1 * lim;
    c.axes("pseudo-time t", "Re T_odd");
    c.polyline(t, rh, "#1f77b4");
    c.polyline(t, ri, "#d62728");
    c.text(c.px(cfg.t_lo) + 8, c.py(c.y1) + 14,
           "hemorrhagic " + hem->first + " (blue) vs ischemic " + isch->first + " (red)", 11);
    c.save(plotdir / ("overlay_" + slug(hem->first) + "_" + slug(isch->first) + "_" + tag + ".svg"),
           "paired stroke overlay, first angle (" + tag + ")");
  }
}

} // namespace eit
