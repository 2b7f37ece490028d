#include "vitslim/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "vitslim/checkpoint.hpp"
#include "vitslim/error.hpp"

namespace vitslim {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void deciles_header(std::ostringstream& os, const char* family) {
  for (int k = 0; k <= 10; ++k) os << ',' << family << "_q" << k * 10;
}

void deciles_row(std::ostringstream& os, const Deciles& d) {
  for (double v : d) os << ',' << num(v);
}

}  // namespace

std::string head_dims_csv(const SlimArchitecture& arch) {
  std::ostringstream os;
  os << "layer";
  const std::size_t H = arch.layers.empty() ? 0 : arch.layers[0].heads.size();
  for (std::size_t h = 0; h < H; ++h) os << ",head" << h;
  os << '\n';
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    os << l;
    for (const auto& head : arch.layers[l].heads) os << ',' << head.size();
    os << '\n';
  }
  return os.str();
}

std::string mlp_dims_csv(const SlimArchitecture& arch) {
  std::ostringstream os;
  os << "layer,mlp_dims\n";
  for (std::size_t l = 0; l < arch.layers.size(); ++l) {
    os << l << ',' << arch.layers[l].mlp.size() << '\n';
  }
  return os.str();
}

std::string history_csv(const History& history) {
  std::ostringstream os;
  os << "epoch,ce_loss,penalty,total,attn_l1,mlp_l1,patch_l1";
  deciles_header(os, "attn");
  deciles_header(os, "mlp");
  deciles_header(os, "patch");
  os << '\n';
  for (const EpochRecord& r : history.epochs) {
    os << r.epoch << ',' << num(r.ce) << ',' << num(r.penalty) << ',' << num(r.total) << ','
       << num(r.attn_l1) << ',' << num(r.mlp_l1) << ',' << num(r.patch_l1);
    deciles_row(os, r.attn);
    deciles_row(os, r.mlp);
    deciles_row(os, r.patch);
    os << '\n';
  }
  return os.str();
}

std::string step_history_csv(const History& history) {
  std::ostringstream os;
  os << "step,epoch,lr,ce_loss,penalty,total\n";
  for (const StepRecord& r : history.steps) {
    os << r.step << ',' << r.epoch << ',' << num(r.lr) << ',' << num(r.ce) << ','
       << num(r.penalty) << ',' << num(r.total) << '\n';
  }
  return os.str();
}

std::string heatmap_svg(const std::vector<std::vector<double>>& grid, double vmax,
                        const std::string& title, const std::string& row_label,
                        const std::string& col_label) {
  constexpr int cell = 36, left = 70, top = 40;
  const std::size_t rows = grid.size();
  std::size_t cols = 0;
  for (const auto& r : grid) cols = std::max(cols, r.size());
  const int width = left + static_cast<int>(cols) * cell + 20;
  const int height = top + static_cast<int>(rows) * cell + 40;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">" << title << "</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    os << "<text x=\"4\" y=\"" << top + static_cast<int>(r) * cell + cell / 2 + 4 << "\">"
       << row_label << ' ' << r << "</text>\n";
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      const double v = grid[r][c];
      const double t = vmax > 0.0 ? std::clamp(v / vmax, 0.0, 1.0) : 0.0;
      const int light = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      const int x = left + static_cast<int>(c) * cell;
      const int y = top + static_cast<int>(r) * cell;
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"rgb(" << light << ',' << light << ",255)\" stroke=\"#888\" data-row=\"" << r
         << "\" data-col=\"" << c << "\" data-value=\"" << num(v) << "\"/>\n";
      os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
         << "\" text-anchor=\"middle\" fill=\"" << (t > 0.5 ? "#fff" : "#000") << "\">" << num(v)
         << "</text>\n";
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    os << "<text x=\"" << left + static_cast<int>(c) * cell + cell / 2 << "\" y=\""
       << top + static_cast<int>(rows) * cell + 16 << "\" text-anchor=\"middle\">" << col_label
       << ' ' << c << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void export_reports(const SlimArchitecture& arch, const ViTConfig& config,
                    const CostReport& cost, const History* history, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create report directory " + out_dir);
  }
  const std::filesystem::path dir(out_dir);
  auto write = [&dir](const char* name, const std::string& text) {
    write_file_atomic((dir / name).string(), text);
  };

  write("arch.json", nlohmann::json(arch).dump(2) + "\n");
  write("head_dims.csv", head_dims_csv(arch));
  write("mlp_dims.csv", mlp_dims_csv(arch));

  std::vector<std::vector<double>> heads, mlp;
  for (const LayerArch& la : arch.layers) {
    std::vector<double> row;
    for (const auto& h : la.heads) row.push_back(static_cast<double>(h.size()));
    heads.push_back(std::move(row));
    mlp.push_back({static_cast<double>(la.mlp.size())});
  }
  write("head_dims.svg", heatmap_svg(heads, static_cast<double>(config.head_dim),
                                     "Kept attention dims per head", "layer", "head"));
  write("mlp_dims.svg", heatmap_svg(mlp, static_cast<double>(config.mlp_dim),
                                    "Kept MLP dims per layer", "layer", "mlp"));

  write("cost.json", nlohmann::json(cost).dump(2) + "\n");
  write("cost.txt", format_cost_table(cost));
  if (history && !history->epochs.empty()) write("history.csv", history_csv(*history));
  if (history && !history->steps.empty()) write("steps.csv", step_history_csv(*history));
}

}  // namespace vitslim
