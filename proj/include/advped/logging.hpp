#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <spdlog/spdlog.h>

namespace advped {

/// Console logging for the process: level from ADVPED_LOG (trace, debug,
/// info, warn, error, off; default info), no timestamps.
void init_logging();

/// Logger for one training run: console sink plus `<dir>/train.log`, the
/// only place timestamps appear. Loggers are not registered globally, so
/// concurrent runs never share one.
std::shared_ptr<spdlog::logger> make_run_logger(const std::filesystem::path& dir,
                                                const std::string& name);

}  // namespace advped
