#pragma once
#include <svmc/ablation.hpp>
#include <svmc/invariants.hpp>

#include <json.hpp>

#include <string>

namespace svmc
{
	inline constexpr const char* kReportSchema = "report-v1";
	inline constexpr const char* kEngineVersion = "1.0.0";

	struct RunReport
	{
		std::string model;
		Verdict verdict;
		EngineLimits limits;
		double wall_seconds = 0;
	};

	nlohmann::json verdict_to_json( const Verdict& v );
	Verdict verdict_from_json( const nlohmann::json& j );  // inverse on everything verdict_to_json writes

	nlohmann::json report_to_json( const RunReport& r );
	std::string report_text( const RunReport& r );

	nlohmann::json trace_to_json( const Trace& t );
	std::string trace_text( const Trace& t );

	nlohmann::json ablation_to_json( const std::string& model, const AblationReport& a );
	std::string ablation_text( const std::string& model, const AblationReport& a );
};
