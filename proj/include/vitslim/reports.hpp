#pragma once

#include <string>
#include <vector>

#include "vitslim/accounting.hpp"
#include "vitslim/arch.hpp"
#include "vitslim/trainer.hpp"

namespace vitslim {

// Rows are layers, columns heads; cells are kept dims per head.
std::string head_dims_csv(const SlimArchitecture& arch);
// One row per layer: layer, kept MLP dims.
std::string mlp_dims_csv(const SlimArchitecture& arch);
std::string history_csv(const History& history);
std::string step_history_csv(const History& history);

// Static heatmap of a numeric grid. Each cell is a <rect> whose fill gets
// darker as the value grows (linear in value / vmax) and which carries
// data-row, data-col and data-value attributes.
std::string heatmap_svg(const std::vector<std::vector<double>>& grid, double vmax,
                        const std::string& title, const std::string& row_label,
                        const std::string& col_label);

// Writes arch.json, head_dims.csv/.svg, mlp_dims.csv/.svg, cost.json,
// cost.txt and (if non-empty) history.csv and steps.csv under out_dir.
// Throws IoError when out_dir cannot be written.
void export_reports(const SlimArchitecture& arch, const ViTConfig& config,
                    const CostReport& cost, const History* history, const std::string& out_dir);

}  // namespace vitslim
