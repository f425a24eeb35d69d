import { sendPaymentReminder, scheduleShipping, sendNotification } from './orderActions';
import { updateOrderUI } from './orderUI';

export type OrderStatus = 'pending' | 'paid' | 'shipped' | 'cancelled'

export interface Order {
  id: string;
  status: OrderStatus;
}

export function processOrder(order: Order){
  updateOrderUI(order.status);
  switch(order.status) {
    case 'pending': return sendPaymentReminder(order);
    case 'paid': return scheduleShipping(order);
    case 'shipped': return sendNotification(order);
  }
}
