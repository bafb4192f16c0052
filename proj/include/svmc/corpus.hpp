#pragma once
#include <svmc/model.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svmc
{
	struct CorpusEntry
	{
		std::string name;
		std::string path;  // relative to corpus/
		Scope scope = Scope::External;
		std::string phase;
		std::vector<std::string> preconditions;
		ExpectedVerdict expected;
		std::optional<std::vector<std::string>> expected_necessary;
		std::vector<std::string> provenance;
		bool reconstruction = false;
	};

	std::vector<CorpusEntry> list_entries();

	// Parsed and validated. Throws ModelError E_UNKNOWN_MODEL.
	//
	ProtocolModel load( std::string_view name );

	// Raw .svm text of an entry, or nothing.
	//
	std::optional<std::string_view> corpus_source( std::string_view name );
};
