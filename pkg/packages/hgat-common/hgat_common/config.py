from hgat_common.confi import Confi, confi

_LOG_FORMAT_WITHOUT_PID = "<green>{time}</green> | <blue>{name: <40}</blue>|<level>{level:^6} | {message}</level>\n{exception}"
_LOG_FORMAT_WITH_PID = "<green>{time}</green> | {process} | <blue>{name: <40}</blue>|<level>{level:^6} | {message}</level>\n{exception}"


class HgatCommonConfig(Confi):
    # console sink
    LOG_LEVEL = confi.str("LOG_LEVEL", "INFO", description="Lowest level logged to the console")
    LOG_FORMAT_INCLUDE_PID = confi.bool(
        "LOG_FORMAT_INCLUDE_PID",
        False,
        description="Add the process id to the default format (useful with worker threads)",
    )
    LOG_FORMAT = confi.str(
        "LOG_FORMAT",
        None,
        description="Loguru format string; overrides the default chosen by LOG_FORMAT_INCLUDE_PID",
    )
    LOG_TRACEBACK = confi.bool(
        "LOG_TRACEBACK", True, description="Extend tracebacks beyond the catching frame"
    )
    LOG_DIAGNOSE = confi.bool(
        "LOG_DIAGNOSE", False, description="Show variable values in tracebacks"
    )
    LOG_COLORIZE = confi.bool("LOG_COLORIZE", True, description="Colorize console logs")
    LOG_SERIALIZE = confi.bool(
        "LOG_SERIALIZE", False, description="Write console logs as JSON records"
    )
    LOG_PIPE_TO_STDERR = confi.bool(
        "LOG_PIPE_TO_STDERR",
        True,
        description="Log to stderr (keeps stdout for command output); otherwise to stdout",
    )
    LOG_MODULE_EXCLUDE_LIST = confi.list(
        "LOG_MODULE_EXCLUDE_LIST",
        [],
        description="Module prefixes whose logs are dropped, e.g. hgat_forecast.graph",
    )
    LOG_MODULE_INCLUDE_LIST = confi.list(
        "LOG_MODULE_INCLUDE_LIST",
        [],
        description="Module prefixes logged even when a parent is excluded",
    )

    # file sink
    LOG_TO_FILE = confi.bool("LOG_TO_FILE", False, description="Also write logs to a file")
    LOG_FILE_PATH = confi.str(
        "LOG_FILE_PATH", "hgat_{time}.log", description="Log file path (loguru placeholders allowed)"
    )
    LOG_FILE_ROTATION = confi.str(
        "LOG_FILE_ROTATION", "250 MB", description="Start a new log file past this size"
    )
    LOG_FILE_RETENTION = confi.str(
        "LOG_FILE_RETENTION", "10 days", description="Delete rotated log files older than this"
    )
    LOG_FILE_COMPRESSION = confi.str(
        "LOG_FILE_COMPRESSION", None, description="Compression of rotated log files, e.g. gz"
    )
    LOG_FILE_SERIALIZE = confi.bool(
        "LOG_FILE_SERIALIZE", True, description="Write file logs as JSON records"
    )
    LOG_FILE_LEVEL = confi.str(
        "LOG_FILE_LEVEL", "INFO", description="Lowest level written to the log file"
    )

    def log_format(self) -> str:
        if self.LOG_FORMAT:
            return self.LOG_FORMAT
        if self.LOG_FORMAT_INCLUDE_PID:
            return _LOG_FORMAT_WITH_PID
        return _LOG_FORMAT_WITHOUT_PID


hgat_common_config = HgatCommonConfig(prefix="HGAT_")
