#include "tsc/registry.hpp"

#include "tsc/dictionary.hpp"
#include "tsc/ensembles.hpp"
#include "tsc/error.hpp"
#include "tsc/intervals.hpp"
#include "tsc/nn.hpp"
#include "tsc/shapelets.hpp"
#include "tsc/trees.hpp"

namespace tsc {

const std::vector<std::string>& classifier_names() {
  static const std::vector<std::string> names = {
      "ed",  "dtw",  "dtwcv",  "wdtw", "lcss", "erp", "twe", "msm",       "cid",  "dddtw", "dtdc", "bop",
      "saxvsm", "boss", "dtwf", "fs",  "st",  "tsf",  "tsbf", "lps", "ee", "cote-lite", "randf"};
  return names;
}

namespace {

std::string registry_listing() {
  std::string out;
  for (const auto& n : classifier_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

GridFactory fixed_grid(std::vector<DistanceSpec> (*g)()) {
  return [g](const Dataset&) { return g(); };
}

}  // namespace

std::unique_ptr<Classifier> make_classifier(const std::string& name, std::uint64_t seed) {
  LoocvOptions loocv;
  loocv.seed = seed;
  StOptions st;
  st.seed = seed;
  st.max_candidates = kRegistryShapeletBudget;

  if (name == "ed") return std::make_unique<NearestNeighbor>("ed", DistanceSpec::ed(), loocv);
  if (name == "dtw") return std::make_unique<NearestNeighbor>("dtw", DistanceSpec::dtw(1.0), loocv);
  if (name == "dtwcv") return std::make_unique<NearestNeighbor>("dtwcv", fixed_grid(grids::dtw_windows), loocv);
  if (name == "wdtw") return std::make_unique<NearestNeighbor>("wdtw", fixed_grid(grids::wdtw), loocv);
  if (name == "lcss")
    return std::make_unique<NearestNeighbor>("lcss", [](const Dataset& d) { return grids::lcss(d); }, loocv);
  if (name == "erp") return std::make_unique<NearestNeighbor>("erp", fixed_grid(grids::erp), loocv);
  if (name == "twe") return std::make_unique<NearestNeighbor>("twe", fixed_grid(grids::twe), loocv);
  if (name == "msm") return std::make_unique<NearestNeighbor>("msm", fixed_grid(grids::msm), loocv);
  if (name == "cid") return std::make_unique<CidNearestNeighbor>(loocv);
  if (name == "dddtw") return std::make_unique<NearestNeighbor>("dddtw", fixed_grid(grids::dd_dtw), loocv);
  if (name == "dtdc") return std::make_unique<NearestNeighbor>("dtdc", fixed_grid(grids::dtd_c), loocv);
  if (name == "bop") return std::make_unique<Bop>();
  if (name == "saxvsm") return std::make_unique<SaxVsm>();
  if (name == "boss") return std::make_unique<BossEnsemble>();
  if (name == "dtwf") return std::make_unique<DtwF>(seed, loocv);
  if (name == "fs") {
    FsOptions o;
    o.seed = seed;
    return std::make_unique<FastShapelets>(o);
  }
  if (name == "st") return std::make_unique<ShapeletTransformClassifier>(st);
  if (name == "tsf") {
    TsfOptions o;
    o.seed = seed;
    return std::make_unique<TimeSeriesForest>(o);
  }
  if (name == "tsbf") {
    TsbfOptions o;
    o.seed = seed;
    return std::make_unique<TimeSeriesBagOfFeatures>(o);
  }
  if (name == "lps") {
    LpsOptions o;
    o.seed = seed;
    return std::make_unique<LearnedPatternSimilarity>(o);
  }
  if (name == "ee") return std::make_unique<ElasticEnsemble>(loocv);
  if (name == "cote-lite") {
    CoteOptions o;
    o.loocv = loocv;
    o.shapelets = st;
    o.seed = seed;
    return std::make_unique<CoteLite>(o);
  }
  if (name == "randf") {
    ForestOptions f;
    f.seed = seed;
    return std::make_unique<TransformClassifier>(
        "randf", [](std::span<const double> s) { return Series(s.begin(), s.end()); },
        [f] { return std::make_unique<RandomForest>(f); });
  }
  throw ParameterError("unknown classifier '" + name + "'; available: " + registry_listing());
}

}  // namespace tsc
