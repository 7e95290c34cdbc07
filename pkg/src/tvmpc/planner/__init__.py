from .gait import (
    Footstep,
    GaitSchedule,
    GaitTiming,
    ScheduleExhausted,
    VerticalParams,
    diagonal_schedule,
    vertical_reference,
    zmp_reference,
)
from .horizon import GaitClock, HorizonPlan, InputLimits, build_horizon, sample_phase
from .mpc import ControlOutput, MpcSettings, Tvmpc, assemble_qp, soften_zmp_rows
from .stepping import StepAdjustPolicy, adjust_step, extrapolated_step
