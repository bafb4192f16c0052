#pragma once
#include <svmc/model.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svmc
{
	inline constexpr std::string_view kFormatHeader = "svm-format-version 1";

	struct SourceSpan
	{
		std::string file;
		int line = 1;
		int column = 1;
	};

	struct ParseResult
	{
		std::optional<ProtocolModel> model;
		std::vector<Diagnostic> diagnostics;
		bool ok() const { return model.has_value(); }
	};

	// Parses and validates. Never throws on bad input.
	//
	ParseResult parse( std::string_view text, std::string file = {} );

	// Syntax only, no validation. Used by tests that build broken models.
	//
	ParseResult parse_unchecked( std::string_view text, std::string file = {} );

	std::string serialize( const ProtocolModel& m );

	// Single term in model syntax; nonces without '@' belong to `context`.
	//
	std::optional<Term> parse_term( std::string_view text, std::string_view context = {} );
};
