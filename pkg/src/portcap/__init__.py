"""Operating-capacity estimation for ports from queue statistics."""
from .anchorage import (AnchorageCapacityEstimate, AnchorageObservation, ClassQueue,
                        anchorage_mean_wait, anchorage_queue_lengths, solve_port_capacity)
from .errors import (ConfigError, DegenerateObservationError, PortCapError, SchemaError,
                     SolverError, UnstableRegimeError)
from .terminal_export import (ExportCapacityEstimate, ExportObservation, export_queue_length,
                              export_service_rate, solve_export_capacity)
from .terminal_import import (BatchMoments, ImportCapacityEstimate, ImportObservation,
                              batch_moments_from_mean_variance, import_dwell,
                              import_queue_length, solve_import_capacity)
from .units import EPS_STAB, CargoClass, Duration, Window, to_hours, traffic_intensity
from .validation import (DEFAULT_YARD_CAPACITY, ValidationRow, YardCapacityEstimate,
                         estimate_yard_capacity, validate_window)

__version__ = "0.1.0"
