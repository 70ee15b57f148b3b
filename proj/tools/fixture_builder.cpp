#include "fixture_builder.hpp"

#include "semvote/error.hpp"
#include "semvote/prompts.hpp"

namespace semvote::fixture {

std::size_t build_fixture_dir(const std::vector<Problem>& problems, const json& responses,
                              const std::filesystem::path& out) {
  const auto k = responses.at("k").get<std::size_t>();
  const auto m = responses.at("m").get<std::size_t>();
  std::filesystem::create_directories(out);
  std::size_t written = 0;
  auto put = [&](const std::string& prompt, const json& doc) {
    write_file_atomic(out / (sha256_hex(prompt) + ".json"), doc.dump(1) + "\n");
    ++written;
  };
  auto reply = [](const json& payload) { return json{{"samples", json::array({"```json\n" + payload.dump(2) + "\n```\n"})}}; };

  for (const auto& p : problems) {
    const auto& all = responses.at("problems");
    if (!all.contains(p.task_id)) throw Error(ErrorKind::kConfig, "no fixture responses for " + p.task_id);
    const auto& r = all.at(p.task_id);
    put(prompts::candidate_prompt(p.prompt), json{{"samples", r.at("samples")}, {"greedy", r.at("greedy")}});
    put(prompts::sketch_prompt(p.prompt, k), reply(r.at("sketches")));
    const auto& sketches = r.at("sketches");
    for (std::size_t i = 0; i < sketches.size(); ++i) {
      auto prompt = prompts::variation_prompt(sketches[i].at("description").get<std::string>(),
                                              sketches[i].at("input_expr").get<std::string>(), p.prompt, m - 1);
      put(prompt, reply(r.at("variations").at(i)));
    }
    put(prompts::direct_prompt(p.prompt, k * m), reply(r.at("direct")));
  }
  return written;
}

}  // namespace semvote::fixture
