# Experiment tasks, one per name accepted in a spec file's task list
from tasks.base_task import BaseTask, TaskContext, TaskResult, degree_schedule
from tasks.sumrule_task import SumRuleTask
from tasks.asymptotic_tasks import (ArcsTask, BoundTask, L2Task, PointwiseTask, RakhmanovTask, SingularTask,
                                    WaveTask)
from tasks.variational_tasks import DistanceTask, VariationalTask

TASKS = {task.name: task for task in (SumRuleTask, PointwiseTask, L2Task, ArcsTask, BoundTask, RakhmanovTask,
                                      SingularTask, WaveTask, VariationalTask, DistanceTask)}

__all__ = ['BaseTask', 'TaskContext', 'TaskResult', 'TASKS', 'degree_schedule']
