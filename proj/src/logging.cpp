#include "advped/logging.hpp"

#include <cstdlib>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>

namespace advped {

namespace {

spdlog::level::level_enum env_level() {
  const char* v = std::getenv("ADVPED_LOG");
  if (v == nullptr || *v == '\0') return spdlog::level::info;
  const auto lvl = spdlog::level::from_str(v);
  // from_str maps unknown names to off; treat those as the default instead.
  if (lvl == spdlog::level::off && std::string(v) != "off") return spdlog::level::info;
  return lvl;
}

}  // namespace

void init_logging() {
  auto console = spdlog::stderr_color_mt("advped");
  console->set_pattern("[%l] %v");
  console->set_level(env_level());
  spdlog::set_default_logger(console);
}

std::shared_ptr<spdlog::logger> make_run_logger(const std::filesystem::path& dir,
                                                const std::string& name) {
  std::filesystem::create_directories(dir);
  auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>((dir / "train.log").string(), true);
  file->set_pattern("%Y-%m-%d %H:%M:%S.%e [%l] %v");
  file->set_level(spdlog::level::trace);
  std::vector<spdlog::sink_ptr> sinks{file};
  if (auto def = spdlog::default_logger()) {
    for (auto& s : def->sinks()) sinks.push_back(s);
  }
  auto logger = std::make_shared<spdlog::logger>(name, sinks.begin(), sinks.end());
  logger->set_level(std::min(env_level(), spdlog::level::info));
  logger->flush_on(spdlog::level::warn);
  return logger;
}

}  // namespace advped
