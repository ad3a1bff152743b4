#pragma once

#include <string>
#include <string_view>

namespace xlqa::detail {

bool is_valid_utf8(std::string_view s);

}  // namespace xlqa::detail
