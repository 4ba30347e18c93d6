#include "oblmp/separate.hpp"

#include "oblmp/matrix_io.hpp"

namespace oblmp {

SeparateInputs load_separate_inputs(const std::filesystem::path& signal, const std::filesystem::path& dictionary,
                                    const std::filesystem::path& background) {
  SeparateInputs in;
  const MatrixFile sf = read_matrix_csv(signal);
  if (sf.data.cols() != 1) {
    throw ParseError(signal.string() + ": a signal file holds exactly one column, found " +
                     std::to_string(sf.data.cols()));
  }
  in.signal = sf.data.col(0);
  MatrixFile df = read_matrix_csv(dictionary);
  in.atoms = std::move(df.data);
  in.atom_names = std::move(df.column_names);
  in.background = read_matrix_csv(background).data;
  return in;
}

nlohmann::ordered_json separate(const SeparateInputs& in, const SeparateOptions& opts) {
  const Index n = in.signal.size();
  if (in.atoms.cols() == 0) throw EmptyDictionary();
  if (in.atoms.rows() != n) throw DimensionMismatch("dictionary rows vs signal length", n, in.atoms.rows());
  if (in.background.cols() > 0 && in.background.rows() != n) {
    throw DimensionMismatch("background rows vs signal length", n, in.background.rows());
  }

  const auto bg = in.background.cols() > 0
                      ? BackgroundModel<double>::from_sources(in.background, opts.bg_tol, opts.m_cap)
                      : BackgroundModel<double>::empty(n);
  const auto res = oblmp(in.atoms, bg, in.signal, opts.pursuit);

  nlohmann::ordered_json j;
  j["stop_reason"] = std::string(to_string(res.stop_reason));
  j["iterations"] = res.iterations;
  j["index_base"] = 1;
  auto idx = nlohmann::ordered_json::array();
  auto names = nlohmann::ordered_json::array();
  for (Index i : res.selected_indices) {
    idx.push_back(i + 1);
    if (static_cast<std::size_t>(i) < in.atom_names.size()) names.push_back(in.atom_names[static_cast<std::size_t>(i)]);
  }
  j["selected_indices"] = std::move(idx);
  j["selected_names"] = std::move(names);
  j["coeffs"] = std::vector<double>(res.coeffs.data(), res.coeffs.data() + res.coeffs.size());
  j["reconstruction"] =
      std::vector<double>(res.reconstruction.data(), res.reconstruction.data() + res.reconstruction.size());
  j["background"] = {{"source_count", bg.source_count()}, {"m", bg.size()}, {"tol", opts.bg_tol}};
  j["diagnostics"] = {{"first_value", res.diagnostics.first_value},
                      {"delta_used", res.diagnostics.delta_used},
                      {"final_max_value", res.diagnostics.final_max_value},
                      {"step_values", res.diagnostics.step_values}};
  return j;
}

}  // namespace oblmp
