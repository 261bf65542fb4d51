// C binding. Thin translation layer: every entry point catches, records the
// message in a thread-local slot, and maps the exception type to a status.

#include <honls.h>

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "honls/grid.hpp"
#include "honls/studies.hpp"

struct honls_config {
  honls::StudyConfig cfg;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

honls_status record(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const honls::io_error*>(&e)) return HONLS_ERROR_IO;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return HONLS_ERROR_CONFIG;
  if (dynamic_cast<const honls::config_error*>(&e)) return HONLS_ERROR_CONFIG;
  return HONLS_ERROR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* honls_last_error(void) { return g_last_error.c_str(); }

const char* honls_version(void) { return honls::library_version(); }

honls_config* honls_config_new(void) {
  try {
    // Parsing empty text resolves environment overrides the same way a file
    // parse would, so defaults and parsed configs behave identically.
    return new honls_config{honls::parse_study_config("")};
  } catch (const std::exception& e) {
    record(e);
    return nullptr;
  }
}

honls_config* honls_config_parse(const char* text) {
  if (!text) {
    set_error("honls_config_parse: text is NULL");
    return nullptr;
  }
  try {
    return new honls_config{honls::parse_study_config(text)};
  } catch (const std::exception& e) {
    record(e);
    return nullptr;
  }
}

honls_config* honls_config_parse_file(const char* path) {
  if (!path) {
    set_error("honls_config_parse_file: path is NULL");
    return nullptr;
  }
  try {
    return new honls_config{honls::parse_study_config_file(path)};
  } catch (const std::exception& e) {
    record(e);
    return nullptr;
  }
}

void honls_config_free(honls_config* cfg) { delete cfg; }

honls_status honls_config_set(honls_config* cfg, const char* key,
                              const char* value) {
  if (!cfg || !key || !value) {
    set_error("honls_config_set: NULL argument");
    return HONLS_ERROR_CONFIG;
  }
  try {
    honls::set_study_key(cfg->cfg, key, value);
    return HONLS_OK;
  } catch (const std::exception& e) {
    return record(e);
  }
}

char* honls_config_dump(const honls_config* cfg) {
  if (!cfg) {
    set_error("honls_config_dump: cfg is NULL");
    return nullptr;
  }
  try {
    return dup_string(honls::dump_study_config(cfg->cfg));
  } catch (const std::exception& e) {
    record(e);
    return nullptr;
  }
}

honls_status honls_config_validate(const honls_config* cfg) {
  if (!cfg) {
    set_error("honls_config_validate: cfg is NULL");
    return HONLS_ERROR_CONFIG;
  }
  try {
    honls::validate_study_config(cfg->cfg);
    return HONLS_OK;
  } catch (const std::exception& e) {
    return record(e);
  }
}

honls_status honls_study_run(const honls_config* cfg, const char* out_dir,
                             int* study_exit, char** message) {
  if (message) *message = nullptr;
  if (study_exit) *study_exit = 1;
  if (!cfg) {
    set_error("honls_study_run: cfg is NULL");
    return HONLS_ERROR_CONFIG;
  }
  try {
    honls::StudyConfig local = cfg->cfg;
    if (out_dir) local.out_dir = out_dir;
    honls::StudyOutput out = honls::run_study(local);
    honls::write_study_output(out, local.out_dir);
    if (study_exit) *study_exit = out.exit_code;
    if (message) {
      *message = dup_string(out.message + "; outputs in " + local.out_dir);
    }
    return HONLS_OK;
  } catch (const std::exception& e) {
    return record(e);
  }
}

void honls_string_free(char* s) { std::free(s); }

}  // extern "C"
