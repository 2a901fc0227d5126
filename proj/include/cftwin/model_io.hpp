#pragma once

#include <map>
#include <span>
#include <string>

#include <json.hpp>

#include "cftwin/scm.hpp"
#include "cftwin/semantics.hpp"

namespace cftwin {

/// A model file: the validated SCM plus the free-form "metadata" object.
struct ModelFile {
  Scm scm;
  nlohmann::ordered_json metadata;
};

/// Parses the JSON model format. Every schema problem found is reported in one
/// Error(Validation), one line each, prefixed with its JSON path.
ModelFile parse_model(const std::string& text);
/// parse_model on a file's contents; Error(Io) when unreadable.
ModelFile load_model(const std::string& path);

/// Canonical JSON for `scm`. Mechanisms written from expressions keep the
/// expression; everything else is written as a table keyed by the
/// comma-joined parent values. `metadata` is written when not null.
nlohmann::ordered_json model_to_json(const Scm& scm,
                                     const nlohmann::ordered_json& metadata = nullptr);
std::string dump_model(const Scm& scm, const nlohmann::ordered_json& metadata = nullptr);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Policies for `targets` from a command-line spec:
///   flip | identity | const:<v>   same policy on every target
///   A=flip,B=const:1              one entry per target
///   <file>.json                   {"A": {"0": 1, "1": 0}} with an output value
///                                 or a probability row per natural value
std::map<std::string, Policy> parse_policy_spec(const Scm& scm, std::span<const std::string> targets,
                                                const std::string& spec);

/// Splits "A,B" into names; the empty string gives no names.
std::vector<std::string> split_list(const std::string& text);

}  // namespace cftwin
