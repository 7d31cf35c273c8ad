#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fm/dsl.hpp"
#include "fm/scenario.hpp"

namespace fm::test {

std::string fixture_path(const std::string& file) { return std::string(FM_FIXTURE_DIR) + "/" + file; }
std::string golden_path(const std::string& file) { return std::string(FM_GOLDEN_DIR) + "/" + file; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Document load_fixture(const std::string& name) {
  const auto path = fixture_path(name + ".fm");
  auto result = parse(SourceText{read_file(path), path});
  if (!result.ok()) throw std::runtime_error(result.diagnostics.front().format(path));
  return std::move(*result.document);
}

Document parse_document(const std::string& text) {
  auto result = parse(SourceText{text, "<test>"});
  if (!result.ok()) throw std::runtime_error(result.diagnostics.front().format("<test>"));
  return std::move(*result.document);
}

Scenario parse_scenario_text(const std::string& text, const Model& model) {
  auto result = parse_scenario(text, model);
  if (!result.ok()) throw std::runtime_error(result.diagnostics.front().format("<test>"));
  return std::move(*result.scenario);
}

Scenario load_scenario(const std::string& name, const Model& model) {
  const auto path = fixture_path(name + ".scn");
  auto result = parse_scenario(read_file(path), model);
  if (!result.ok()) throw std::runtime_error(result.diagnostics.front().format(path));
  return std::move(*result.scenario);
}

}  // namespace fm::test
