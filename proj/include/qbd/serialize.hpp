#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

#include "qbd/blockmat.hpp"
#include "qbd/factorize.hpp"
#include "qbd/model.hpp"

namespace qbd {

using Json = nlohmann::ordered_json;

/// Shortest decimal form that parses back to the same double.
std::string formatDouble(double v);

Json toJson(const FamilySpec& spec);
FamilySpec specFromJson(const Json& j);

Json toJson(const QbdModel& model);
QbdModel modelFromJson(const Json& j);

/// {"N", "size", "index_map": [[n,k],...], "entries": row-major rows}.
Json toJson(const DenseTruncation& t);
DenseTruncation truncationFromJson(const Json& j);

/// Levels with banded A, B, C blocks.
Json toJson(const BlockTridiagonal& J);

/// Keys "dn,dk" with explicit signs, e.g. "+1,-1".
Json toJson(const UrnTable& t);

/// Nonzero entries as from_level,from_phase,to_level,to_phase,value.
void writeCsv(std::ostream& os, const DenseTruncation& t);

/// Writes through a temporary file in the same directory, then renames.
void writeFileAtomic(const std::string& path, const std::string& content);

}  // namespace qbd
