#pragma once

#include <string>
#include <string_view>

namespace charonette {

// Escapes markup characters; tab/CR/LF become character references so
// attribute values survive parser whitespace normalisation.
std::string xml_escape(std::string_view text);

}  // namespace charonette
